use cavity_relax::dynamics::{DensityMatrix, StateSpace};
use cavity_relax::linalg::{eig_hermitian, kron, ComplexMatrix, C64};
use cavity_relax::observables::*;
use cavity_relax::operators::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn atomic() -> StateSpace {
    StateSpace::System(SystemSpace::atomic())
}

/// `exp(-i (a X + b Y + c Z))` for one qubit, in closed form.
fn qubit_rotation(a: f64, b: f64, c: f64) -> ComplexMatrix {
    let th = (a * a + b * b + c * c).sqrt();
    if th == 0.0 {
        return ComplexMatrix::identity(2);
    }
    let (n1, n2, n3) = (a / th, b / th, c / th);
    let (co, si) = (th.cos(), th.sin());
    let i = C64::new(0.0, 1.0);
    ComplexMatrix::from_rows(&[
        vec![C64::new(co, 0.0) - i * si * n3, -i * si * n1 - C64::new(si * n2, 0.0)],
        vec![-i * si * n1 + C64::new(si * n2, 0.0), C64::new(co, 0.0) + i * si * n3],
    ])
    .unwrap()
}

#[test]
fn collective_spin_square() {
    let space = SystemSpace::atomic();
    let jz = dressed_spin(&space, DressedKind::Z).matrix;
    let ev = eig_hermitian(&(&jz * &jz)).unwrap().eigenvalues;
    let expected = [0.0, 0.0, 4.0, 4.0];
    for (x, y) in ev.iter().zip(expected) {
        assert!((x - y).abs() < 1e-12, "{ev:?}");
    }
}

#[test]
fn reduced_state_of_product_with_field() {
    let space = SystemSpace::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let at = DensityMatrix::random(atomic(), &mut rng);
    let field = DensityMatrix::random(StateSpace::System(SystemSpace::atomic()), &mut rng);
    // use a 4-level random state as the cavity state
    let full = DensityMatrix::new(kron(at.matrix(), field.matrix()).unwrap(), StateSpace::System(space)).unwrap();
    let red = partial_trace_field(&full).unwrap();
    assert!((red.matrix() - at.matrix()).max_abs() < 1e-14);
    assert!((atomic_mutual_information(&full).unwrap() - mutual_information(&at).unwrap()).abs() < 1e-12);
}

#[test]
fn product_states_carry_no_information() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = DensityMatrix::random(StateSpace::Qubit, &mut rng);
    let b = DensityMatrix::random(StateSpace::Qubit, &mut rng);
    let prod = DensityMatrix::new(kron(a.matrix(), b.matrix()).unwrap(), atomic()).unwrap();
    assert!(mutual_information(&prod).unwrap() < 1e-12);
    let s = von_neumann_entropy(&prod).unwrap();
    assert!((s - von_neumann_entropy(&a).unwrap() - von_neumann_entropy(&b).unwrap()).abs() < 1e-12);
}

#[test]
fn wrong_inputs_are_rejected() {
    let q = DensityMatrix::maximally_mixed(StateSpace::Qubit);
    assert!(partial_trace_atom(&q, 1).is_err());
    assert!(mutual_information(&q).is_err());
    let at = DensityMatrix::maximally_mixed(atomic());
    assert!(partial_trace_atom(&at, 3).is_err());
    let big = DensityMatrix::maximally_mixed(StateSpace::System(SystemSpace::new(2).unwrap()));
    assert!(partial_trace_atom(&big, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn information_is_invariant_under_local_unitaries(
        seed in 0u64..10_000, a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0
    ) {
        let rho = DensityMatrix::random(atomic(), &mut ChaCha8Rng::seed_from_u64(seed));
        let u = qubit_rotation(a, b, c);
        let v = qubit_rotation(d, -a, b);
        let sym = rho.conjugate_by(&kron(&u, &u).unwrap()).unwrap();
        let asym = rho.conjugate_by(&kron(&u, &v).unwrap()).unwrap();
        let mi = mutual_information(&rho).unwrap();
        prop_assert!((mutual_information(&sym).unwrap() - mi).abs() < 1e-10);
        prop_assert!((mutual_information(&asym).unwrap() - mi).abs() < 1e-10);
        prop_assert!((0.0..=2.0).contains(&mi));
    }

    #[test]
    fn entropy_is_concave(seed in 0u64..10_000, p in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DensityMatrix::random(atomic(), &mut rng);
        let y = DensityMatrix::random(atomic(), &mut rng);
        let mix = x.mix(&y, p).unwrap();
        let lhs = von_neumann_entropy(&mix).unwrap();
        let rhs = p * von_neumann_entropy(&x).unwrap() + (1.0 - p) * von_neumann_entropy(&y).unwrap();
        prop_assert!(lhs >= rhs - 1e-12);
        prop_assert!(lhs <= 2.0 + 1e-12);
    }

    #[test]
    fn trace_distance_is_a_metric(s1 in 0u64..1000, s2 in 0u64..1000, s3 in 0u64..1000) {
        let st = |s| DensityMatrix::random(atomic(), &mut ChaCha8Rng::seed_from_u64(s));
        let (x, y, z) = (st(s1), st(s2 + 1000), st(s3 + 2000));
        let dxy = trace_distance(&x, &y).unwrap();
        prop_assert!(dxy <= 2.0 + 1e-12);
        prop_assert!((dxy - trace_distance(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!(dxy <= trace_distance(&x, &z).unwrap() + trace_distance(&z, &y).unwrap() + 1e-12);
    }
}
