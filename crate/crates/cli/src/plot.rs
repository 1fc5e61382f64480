//! CSV dumps and SVG renderings of report curves.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use plotters::prelude::*;

use crate::report::{write_atomic, CurveSet, Report};

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(127, 127, 127),
];

/// `series,x,y` rows for every point of every series.
pub fn to_csv(set: &CurveSet) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["series", "x", "y"])?;
    for s in &set.series {
        for [x, y] in &s.points {
            w.write_record([s.label.as_str(), &x.to_string(), &y.to_string()])?;
        }
    }
    Ok(w.into_inner()?)
}

fn bounds(set: &CurveSet) -> ([f64; 2], [f64; 2]) {
    let mut x = [f64::INFINITY, f64::NEG_INFINITY];
    let mut y = x;
    let pts = set
        .series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .chain(set.boxes.iter().flat_map(|b| [[b.x[0], b.y[0]], [b.x[1], b.y[1]]]));
    for [a, b] in pts {
        if set.log_scale && (a <= 0.0 || b <= 0.0) {
            continue;
        }
        x = [x[0].min(a), x[1].max(a)];
        y = [y[0].min(b), y[1].max(b)];
    }
    let pad = |r: [f64; 2]| {
        if !r[0].is_finite() {
            return [0.0, 1.0];
        }
        let d = ((r[1] - r[0]) * 0.05).max(1e-9);
        [r[0] - d, r[1] + d]
    };
    if set.log_scale {
        let fix = |r: [f64; 2]| if r[0].is_finite() { [r[0] * 0.9, r[1] * 1.1] } else { [1.0, 10.0] };
        (fix(x), fix(y))
    } else {
        (pad(x), pad(y))
    }
}

/// Render one curve set to an SVG string.
pub fn to_svg(set: &CurveSet) -> Result<String> {
    let mut buf = String::new();
    {
        let root = SVGBackend::with_string(&mut buf, (800, 600)).into_drawing_area();
        root.fill(&WHITE)?;
        let (x, y) = bounds(set);
        let mut chart = ChartBuilder::on(&root);
        chart
            .caption(&set.title, ("sans-serif", 20))
            .margin(15)
            .x_label_area_size(40)
            .y_label_area_size(60);
        if set.log_scale {
            let mut c = chart.build_cartesian_2d((x[0]..x[1]).log_scale(), (y[0]..y[1]).log_scale())?;
            c.configure_mesh().x_desc(&set.x_label).y_desc(&set.y_label).draw()?;
            draw_series(&mut c, set, true)?;
        } else {
            let mut c = chart.build_cartesian_2d(x[0]..x[1], y[0]..y[1])?;
            c.configure_mesh().x_desc(&set.x_label).y_desc(&set.y_label).draw()?;
            draw_series(&mut c, set, false)?;
        }
        root.present()?;
    }
    Ok(buf)
}

fn draw_series<'a, DB, X, Y>(c: &mut ChartContext<'a, DB, Cartesian2d<X, Y>>, set: &CurveSet, log: bool) -> Result<()>
where
    DB: DrawingBackend + 'a,
    DB::ErrorType: 'static,
    X: Ranged<ValueType = f64>,
    Y: Ranged<ValueType = f64>,
{
    for b in &set.boxes {
        let corners = [
            (b.x[0], b.y[0]),
            (b.x[1], b.y[0]),
            (b.x[1], b.y[1]),
            (b.x[0], b.y[1]),
            (b.x[0], b.y[0]),
        ];
        c.draw_series(LineSeries::new(corners, BLACK.stroke_width(1)))?
            .label(&b.label)
            .legend(|(x, y)| PathElement::new([(x, y), (x + 20, y)], BLACK));
    }
    for (i, s) in set.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts = s
            .points
            .iter()
            .filter(|[a, b]| !log || (*a > 0.0 && *b > 0.0))
            .map(|[a, b]| (*a, *b));
        let drawn = c.draw_series(LineSeries::new(pts, color.stroke_width(2)))?;
        if i < PALETTE.len() {
            drawn
                .label(&s.label)
                .legend(move |(x, y)| PathElement::new([(x, y), (x + 20, y)], color));
        }
    }
    c.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
    Ok(())
}

/// Write `<name>.csv` and `<name>.svg` for each curve set. Returns the
/// paths written.
pub fn write_plots(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    if report.curves.is_empty() {
        log::warn!("report has no curves; nothing to plot");
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for set in &report.curves {
        let csv = dir.join(format!("{}.csv", set.name));
        write_atomic(&csv, &to_csv(set)?)?;
        let svg = dir.join(format!("{}.svg", set.name));
        write_atomic(&svg, to_svg(set)?.as_bytes())?;
        written.extend([csv, svg]);
    }
    Ok(written)
}
