//! Deterministic CSV/JSON/SVG emitters with atomic writes.
//!
//! Numbers are printed with 17 significant digits so files round-trip the
//! underlying doubles; identical inputs produce byte-identical outputs.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::curves::{Classification, Confirmation, RegionMap};
use crate::error::Result;

/// 17 significant digits, locale-free.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Writes through a temporary sibling file and renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = std::path::PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp_path)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp_path, path)?;
    Ok(())
}

/// Header row plus data rows, LF-terminated UTF-8.
pub fn write_csv<I: IntoIterator<Item = Vec<String>>>(
    path: &Path,
    header: &[&str],
    rows: I,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Overlay curve in data coordinates.
pub struct CurveSeries {
    pub name: String,
    pub color: String,
    pub points: Vec<(f64, f64)>,
}

/// Point marker in data coordinates.
pub struct SvgMarker {
    pub x: f64,
    pub y: f64,
    pub label: String,
}

fn class_color(class: Classification, confirmed: Confirmation) -> &'static str {
    match (class, confirmed) {
        (Classification::CoexistencePredicted, Confirmation::Confirmed) => "#1b7837",
        (Classification::CoexistencePredicted, Confirmation::Refuted) => "#9e4bd0",
        (Classification::CoexistencePredicted, Confirmation::Unchecked) => "#a6dba0",
        (Classification::NonExistenceNecessary, _) => "#d6604d",
        (Classification::NonExistenceLarge, _) => "#f4a582",
        (Classification::Indeterminate, Confirmation::Confirmed) => "#5aae61",
        (Classification::Indeterminate, _) => "#dddddd",
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * self.width
    }
    fn py(&self, y: f64) -> f64 {
        self.top + (self.y1 - y) / (self.y1 - self.y0) * self.height
    }
}

fn svg_num(v: f64) -> String {
    format!("{v:.3}")
}

/// Region-map figure: shaded classification cells, curve overlays, axes and
/// a legend. Output is a pure function of the inputs.
pub fn render_region_svg(
    map: &RegionMap,
    curves: &[CurveSeries],
    markers: &[SvgMarker],
) -> String {
    let frame = Frame {
        x0: map.grid.x_range.0,
        x1: map.grid.x_range.1,
        y0: map.grid.mu_range.0,
        y1: map.grid.mu_range.1,
        left: 70.0,
        top: 20.0,
        width: 640.0,
        height: 480.0,
    };
    let total_w = 920.0;
    let total_h = 560.0;
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w}\" height=\"{total_h}\" \
         viewBox=\"0 0 {total_w} {total_h}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let dx = (frame.x1 - frame.x0) / (map.grid.nx.max(2) - 1) as f64;
    let dy = (frame.y1 - frame.y0) / (map.grid.ny.max(2) - 1) as f64;
    let cw = dx / (frame.x1 - frame.x0) * frame.width;
    let ch = dy / (frame.y1 - frame.y0) * frame.height;
    for cell in &map.cells {
        let cx = frame.px(cell.lambda1);
        let cy = frame.py(cell.mu);
        s.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
            svg_num(cx - cw / 2.0),
            svg_num(cy - ch / 2.0),
            svg_num(cw),
            svg_num(ch),
            class_color(cell.class, cell.confirmed)
        ));
    }

    for series in curves {
        let mut d = String::new();
        let mut pen_up = true;
        for &(x, y) in &series.points {
            if !(x.is_finite() && y.is_finite())
                || x < frame.x0
                || x > frame.x1
                || y < frame.y0
                || y > frame.y1
            {
                pen_up = true;
                continue;
            }
            let cmd = if pen_up { 'M' } else { 'L' };
            d.push_str(&format!("{}{} {} ", cmd, svg_num(frame.px(x)), svg_num(frame.py(y))));
            pen_up = false;
        }
        if !d.is_empty() {
            s.push_str(&format!(
                "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                d.trim_end(),
                series.color
            ));
        }
    }

    for m in markers {
        if m.x.is_finite() && m.y.is_finite() && m.x >= frame.x0 && m.x <= frame.x1 {
            s.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"black\"/>\n\
                 <text x=\"{}\" y=\"{}\" font-size=\"13\">{}</text>\n",
                svg_num(frame.px(m.x)),
                svg_num(frame.py(m.y)),
                svg_num(frame.px(m.x) + 8.0),
                svg_num(frame.py(m.y) - 6.0),
                m.label
            ));
        }
    }

    // axes
    s.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        svg_num(frame.left),
        svg_num(frame.top),
        svg_num(frame.width),
        svg_num(frame.height)
    ));
    for k in 0..=5 {
        let xv = frame.x0 + (frame.x1 - frame.x0) * k as f64 / 5.0;
        let yv = frame.y0 + (frame.y1 - frame.y0) * k as f64 / 5.0;
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            svg_num(frame.px(xv)),
            svg_num(frame.top + frame.height + 18.0),
            svg_num(xv)
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            svg_num(frame.left - 6.0),
            svg_num(frame.py(yv) + 4.0),
            svg_num(yv)
        ));
    }
    let xlabel = if map.equal_lambda { "lambda" } else { "lambda_1" };
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">{xlabel}</text>\n",
        svg_num(frame.left + frame.width / 2.0),
        svg_num(frame.top + frame.height + 38.0)
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"14\">mu</text>\n",
        svg_num(frame.top + frame.height / 2.0)
    ));

    // legend
    let legend = [
        ("coexistence (confirmed)", "#1b7837"),
        ("coexistence (predicted)", "#a6dba0"),
        ("predicted, refuted", "#9e4bd0"),
        ("non-existence (necessary)", "#d6604d"),
        ("non-existence (large mu)", "#f4a582"),
        ("indeterminate", "#dddddd"),
    ];
    let lx = frame.left + frame.width + 16.0;
    let mut ly = frame.top + 10.0;
    for (label, color) in legend {
        s.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"14\" fill=\"{color}\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"12\">{label}</text>\n",
            svg_num(lx),
            svg_num(ly),
            svg_num(lx + 20.0),
            svg_num(ly + 11.0)
        ));
        ly += 22.0;
    }
    for series in curves {
        s.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"4\" fill=\"{}\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n",
            svg_num(lx),
            svg_num(ly + 5.0),
            series.color,
            svg_num(lx + 20.0),
            svg_num(ly + 11.0),
            series.name
        ));
        ly += 22.0;
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{GridSpec, RegionCell};

    fn tiny_map() -> RegionMap {
        let grid = GridSpec {
            x_range: (-1.0, 1.0),
            mu_range: (0.0, 2.0),
            nx: 2,
            ny: 2,
        };
        let cells = vec![
            RegionCell {
                lambda1: -1.0,
                mu: 0.0,
                class: Classification::NonExistenceNecessary,
                confirmed: Confirmation::Unchecked,
            },
            RegionCell {
                lambda1: 1.0,
                mu: 0.0,
                class: Classification::NonExistenceNecessary,
                confirmed: Confirmation::Unchecked,
            },
            RegionCell {
                lambda1: -1.0,
                mu: 2.0,
                class: Classification::Indeterminate,
                confirmed: Confirmation::Unchecked,
            },
            RegionCell {
                lambda1: 1.0,
                mu: 2.0,
                class: Classification::CoexistencePredicted,
                confirmed: Confirmation::Confirmed,
            },
        ];
        RegionMap {
            cells,
            grid,
            lambda2: 1.0,
            equal_lambda: false,
        }
    }

    #[test]
    fn svg_is_deterministic_and_handles_empty_overlays() {
        let map = tiny_map();
        let a = render_region_svg(&map, &[], &[]);
        let b = render_region_svg(&map, &[], &[]);
        assert_eq!(a, b, "identical inputs, identical bytes");
        assert!(a.starts_with("<svg"));
        assert!(a.contains("</svg>"));
        let curves = vec![CurveSeries {
            name: "g".into(),
            color: "#2166ac".into(),
            points: vec![(-1.0, 0.5), (0.0, 1.0), (1.0, 1.5), (f64::NAN, 2.0)],
        }];
        let c = render_region_svg(&map, &curves, &[]);
        assert!(c.contains("path"));
    }

    #[test]
    fn float_formatting_has_17_significant_digits() {
        let s = fmt_f64(1.0 / 3.0);
        assert_eq!(s, "3.3333333333333331e-1");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        let round_trip: f64 = s.parse().unwrap();
        assert_eq!(round_trip, 1.0 / 3.0);
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = std::env::temp_dir().join("membrana_report_test");
        let path = dir.join("x.csv");
        write_csv(&path, &["a", "b"], vec![vec!["1".to_string(), "2".to_string()]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n1,2\n");
        write_csv(&path, &["a", "b"], vec![vec!["3".to_string(), "4".to_string()]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n3,4\n");
        std::fs::remove_dir_all(&dir).ok();
    }
}
