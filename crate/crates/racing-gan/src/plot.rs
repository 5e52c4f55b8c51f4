//! Loss-curve rendering as standalone SVG: discriminator in red, generator 0
//! in green, generator 1 in blue, iteration on the x axis.

use std::path::Path;

use crate::error::{Error, Result};
use crate::trainer::LossTrace;

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 48.0;

// Color scheme: D red, G1 green, G2 blue; extras cycle on.
const COLORS: [&str; 6] = ["red", "green", "blue", "orange", "purple", "teal"];

/// Cap on points per polyline; longer traces are strided down.
const MAX_POINTS: usize = 2400;

struct Series {
    label: String,
    color: &'static str,
    values: Vec<f64>,
}

/// Render a trace to SVG markup.
pub fn render_loss_svg(trace: &LossTrace) -> Result<String> {
    if trace.is_empty() {
        return Err(Error::InvalidSpec("cannot plot an empty trace".into()));
    }
    let mut series = vec![Series {
        label: "D".into(),
        color: COLORS[0],
        values: trace.discriminator_losses(),
    }];
    for i in 0..trace.generator_count() {
        series.push(Series {
            label: format!("G{}", i + 1),
            color: COLORS[(i + 1) % COLORS.len()],
            values: trace.generator_losses(i),
        });
    }

    let iterations: Vec<f64> = trace.records().iter().map(|r| r.iteration as f64).collect();
    let x_max = *iterations.last().unwrap();
    let x_min = iterations[0].min(0.0);
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &series {
        for &v in &s.values {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    if y_min == y_max {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    let (y_min, y_max) = (y_min - pad, y_max + pad);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_x = |it: f64| MARGIN_LEFT + (it - x_min) / (x_max - x_min).max(1.0) * plot_w;
    let to_y = |v: f64| MARGIN_TOP + (y_max - v) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Axes.
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + plot_h;
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{:.2}\" y2=\"{y0}\" stroke=\"black\"/>\n",
        MARGIN_LEFT + plot_w
    ));
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{MARGIN_TOP}\" x2=\"{x0}\" y2=\"{y0}\" stroke=\"black\"/>\n"
    ));

    for tick in 0..=5 {
        let frac = tick as f64 / 5.0;
        let it = x_min + frac * (x_max - x_min);
        let px = to_x(it);
        svg.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{y0}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            y0 + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{:.0}</text>\n",
            y0 + 20.0,
            it
        ));
        let v = y_min + frac * (y_max - y_min);
        let py = to_y(v);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{x0}\" y2=\"{py:.2}\" stroke=\"black\"/>\n",
            x0 - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{v:.3}</text>\n",
            x0 - 9.0,
            py + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">iteration</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {:.2})\">loss</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    let stride = series[0].values.len().div_ceil(MAX_POINTS).max(1);
    for s in &series {
        let mut points = String::new();
        let last = s.values.len() - 1;
        for idx in (0..s.values.len()).step_by(stride).chain(
            // Always keep the final point.
            if last % stride != 0 { Some(last) } else { None },
        ) {
            points.push_str(&format!("{:.2},{:.2} ", to_x(iterations[idx]), to_y(s.values[idx])));
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
            s.color,
            points.trim_end()
        ));
    }

    // Legend.
    for (i, s) in series.iter().enumerate() {
        let ly = MARGIN_TOP + 14.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT - 90.0;
        svg.push_str(&format!(
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            lx + 26.0,
            s.color
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>\n",
            lx + 32.0,
            ly + 4.0,
            s.label
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Render and write; nothing is written when rendering fails.
pub fn write_loss_svg(trace: &LossTrace, path: &Path) -> Result<()> {
    let svg = render_loss_svg(trace)?;
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::TraceRecord;

    fn trace_with_k(k: usize, len: usize) -> LossTrace {
        let mut trace = LossTrace::default();
        for t in 1..=len {
            trace.push(TraceRecord {
                iteration: t,
                loss_d: 1.0 + (t as f64 * 0.1).sin(),
                loss_g: (0..k).map(|i| 0.5 + 0.1 * i as f64 + 1.0 / t as f64).collect(),
            });
        }
        trace
    }

    #[test]
    fn single_generator_plot_has_two_series() {
        let svg = render_loss_svg(&trace_with_k(1, 50)).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn paired_generator_plot_uses_the_standard_colors() {
        let svg = render_loss_svg(&trace_with_k(2, 50)).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        for color in ["\"red\"", "\"green\"", "\"blue\""] {
            assert!(svg.contains(color), "missing {color}");
        }
    }

    #[test]
    fn empty_trace_writes_nothing() {
        let trace = LossTrace::default();
        let dir = std::env::temp_dir().join(format!("racing_gan_plot_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("loss.svg");
        assert!(write_loss_svg(&trace, &path).is_err());
        assert!(!path.exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn long_traces_are_strided() {
        let svg = render_loss_svg(&trace_with_k(1, 10_000)).unwrap();
        // Stride ceil(10000/2400) = 5 -> about 2001 points per line.
        let first_line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let count = first_line.matches(',').count();
        assert!(count <= MAX_POINTS + 2, "{count} points");
        assert!(count >= 1500);
    }
}
