//! CSV and SVG writers.
//!
//! Every CSV starts with a `# schema: <name> v<version>` line followed by a
//! header row. Floats are printed with 17 significant digits so that reruns
//! can be compared byte for byte.

use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "QUASILIN_OUT";

/// `v` with 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// A CSV table built in memory and written in one go.
#[derive(Debug, Clone)]
pub struct Csv {
    schema: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// One CSV cell.
pub enum Cell {
    F(f64),
    U(u64),
    I(usize),
    S(String),
    B(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => fmt_f64(*v),
            Cell::U(v) => v.to_string(),
            Cell::I(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => u8::from(*b).to_string(),
        }
    }
}

impl Csv {
    pub fn new(schema: &str, header: &[&str]) -> Self {
        Self {
            schema: schema.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width for {}", self.schema);
        self.rows.push(row.iter().map(Cell::render).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = format!("# schema: {} v{}\n", self.schema, SCHEMA_VERSION);
        s.push_str(&self.header.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).with_context(|| format!("writing {}", path.display()))
    }
}

/// Output directory of one run.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
    written: std::cell::RefCell<Vec<PathBuf>>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root, written: Default::default() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn csv(&self, name: &str, csv: &Csv) -> Result<PathBuf> {
        let p = self.path(name);
        csv.write(&p)?;
        self.written.borrow_mut().push(p.clone());
        Ok(p)
    }

    pub fn text(&self, name: &str, body: &str) -> Result<PathBuf> {
        let p = self.path(name);
        std::fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
        self.written.borrow_mut().push(p.clone());
        Ok(p)
    }

    pub fn written(&self) -> Vec<PathBuf> {
        self.written.borrow().clone()
    }
}

/// A labelled grid of values in `[0, 1]` (NaN for undefined cells).
pub struct Heatmap<'a> {
    pub title: &'a str,
    pub row_label: &'a str,
    pub col_label: &'a str,
    pub row_ticks: Vec<String>,
    pub col_ticks: Vec<String>,
    /// `values[row][col]`; row 0 is drawn at the bottom.
    pub values: Vec<Vec<f64>>,
}

fn shade(v: f64) -> String {
    if v.is_nan() {
        return "#bbbbbb".into();
    }
    // white (0) to dark blue (1)
    let v = v.clamp(0.0, 1.0);
    let r = (255.0 * (1.0 - 0.9 * v)) as u8;
    let g = (255.0 * (1.0 - 0.75 * v)) as u8;
    let b = (255.0 * (1.0 - 0.35 * v)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Heatmap<'_> {
    pub fn to_svg(&self) -> String {
        let rows = self.values.len();
        let cols = self.values.first().map_or(0, Vec::len);
        let cell_w = (600.0 / cols.max(1) as f64).clamp(2.0, 40.0);
        let cell_h = (400.0 / rows.max(1) as f64).clamp(2.0, 40.0);
        let (left, top) = (80.0, 40.0);
        let width = left + cell_w * cols as f64 + 20.0;
        let height = top + cell_h * rows as f64 + 60.0;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<text x="{left}" y="20" font-size="14">{}</text>"#, escape(self.title));
        for (i, row) in self.values.iter().enumerate() {
            let y = top + cell_h * (rows - 1 - i) as f64;
            for (j, &v) in row.iter().enumerate() {
                let x = left + cell_w * j as f64;
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.2}" y="{y:.2}" width="{cell_w:.2}" height="{cell_h:.2}" fill="{}"><title>{}</title></rect>"#,
                    shade(v),
                    fmt_f64(v)
                );
            }
        }
        let label_every = |n: usize| (n / 12).max(1);
        let re = label_every(rows);
        for (i, t) in self.row_ticks.iter().enumerate().filter(|(i, _)| i % re == 0) {
            let y = top + cell_h * (rows - 1 - i) as f64 + cell_h / 2.0 + 4.0;
            let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.2}" text-anchor="end">{}</text>"#, left - 4.0, escape(t));
        }
        let ce = label_every(cols);
        let base = top + cell_h * rows as f64;
        for (j, t) in self.col_ticks.iter().enumerate().filter(|(j, _)| j % ce == 0) {
            let x = left + cell_w * j as f64 + cell_w / 2.0;
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{}</text>"#, base + 14.0, escape(t));
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            left + cell_w * cols as f64 / 2.0,
            base + 34.0,
            escape(self.col_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">{}</text>"#,
            top + cell_h * rows as f64 / 2.0,
            top + cell_h * rows as f64 / 2.0,
            escape(self.row_label)
        );
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        for v in [0.1, 1.0 / 3.0, 2.0e-300, -7.25] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_has_schema_line_and_header() {
        let mut c = Csv::new("demo", &["k", "rate"]);
        c.push(vec![Cell::I(1), Cell::F(0.5)]);
        assert_eq!(c.render(), "# schema: demo v1\nk,rate\n1,5.0000000000000000e-1\n");
    }

    #[test]
    fn heatmap_svg_has_one_rect_per_cell() {
        let h = Heatmap {
            title: "t",
            row_label: "k",
            col_label: "norm",
            row_ticks: vec!["1".into(), "2".into()],
            col_ticks: vec!["a".into(), "b".into(), "c".into()],
            values: vec![vec![0.0, 0.5, 1.0], vec![f64::NAN, 0.2, 0.3]],
        };
        let svg = h.to_svg();
        assert_eq!(svg.matches("<rect").count(), 6);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }
}
