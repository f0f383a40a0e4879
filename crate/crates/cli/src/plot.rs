use std::path::Path;

use plotters::prelude::*;

use crate::error::{CliError, CliResult};

/// One labelled curve.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn bounds(values: impl Iterator<Item = f64>, log: bool) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite() && (!log || *v > 0.0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(lo <= hi) {
        return None;
    }
    if log {
        Some((lo, if hi > lo { hi } else { lo * 10.0 }))
    } else {
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
        Some((lo - pad, hi + pad))
    }
}

fn plot_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("plotting failed: {e}"))
}

/// Renders `fig` as a static SVG line plot.
pub fn write_svg(fig: &Figure, path: &Path) -> CliResult<()> {
    let all = || fig.series.iter().flat_map(|s| s.points.iter());
    let Some((x0, x1)) = bounds(all().map(|p| p.0), fig.log_x) else {
        return Err(CliError::Io(format!("nothing to plot for {}", path.display())));
    };
    let Some((y0, y1)) = bounds(all().map(|p| p.1), fig.log_y) else {
        return Err(CliError::Io(format!("nothing to plot for {}", path.display())));
    };
    let root = SVGBackend::new(path, (900, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut builder = ChartBuilder::on(&root);
    builder.caption(&fig.title, ("sans-serif", 22)).margin(12).x_label_area_size(45).y_label_area_size(70);

    macro_rules! draw {
        ($chart:expr) => {{
            let mut chart = $chart.map_err(plot_err)?;
            chart
                .configure_mesh()
                .x_desc(fig.x_label.as_str())
                .y_desc(fig.y_label.as_str())
                .draw()
                .map_err(plot_err)?;
            for (k, s) in fig.series.iter().enumerate() {
                let color = Palette99::pick(k).to_rgba();
                let pts = s.points.iter().copied().filter(|(x, y)| {
                    x.is_finite() && y.is_finite() && (!fig.log_x || *x > 0.0) && (!fig.log_y || *y > 0.0)
                });
                chart
                    .draw_series(LineSeries::new(pts, color.stroke_width(2)))
                    .map_err(plot_err)?
                    .label(s.label.clone())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(plot_err)?;
        }};
    }
    match (fig.log_x, fig.log_y) {
        (true, true) => draw!(builder.build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale())),
        (true, false) => draw!(builder.build_cartesian_2d((x0..x1).log_scale(), y0..y1)),
        (false, true) => draw!(builder.build_cartesian_2d(x0..x1, (y0..y1).log_scale())),
        (false, false) => draw!(builder.build_cartesian_2d(x0..x1, y0..y1)),
    }
    root.present().map_err(plot_err)?;
    Ok(())
}
