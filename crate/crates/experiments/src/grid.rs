//! Success-count tables over two experiment axes.

use crate::output::{fmt_f64, Cell, Csv, Heatmap};

/// Success counts over `(k, column)` cells with the seed each cell was run with.
#[derive(Debug, Clone, PartialEq)]
pub struct RateGrid {
    pub name: String,
    /// Name of the column axis (`n` or `norm`).
    pub col_name: String,
    pub ks: Vec<usize>,
    pub cols: Vec<f64>,
    pub trials: usize,
    /// `successes[row][col]`
    pub successes: Vec<Vec<usize>>,
    pub cell_seeds: Vec<Vec<u64>>,
    /// Not part of the deterministic output.
    pub wall_seconds: Vec<Vec<f64>>,
}

impl RateGrid {
    pub fn new(name: &str, col_name: &str, ks: Vec<usize>, cols: Vec<f64>, trials: usize) -> Self {
        let (r, c) = (ks.len(), cols.len());
        Self {
            name: name.into(),
            col_name: col_name.into(),
            ks,
            cols,
            trials,
            successes: vec![vec![0; c]; r],
            cell_seeds: vec![vec![0; c]; r],
            wall_seconds: vec![vec![0.0; c]; r],
        }
    }

    pub fn rate(&self, row: usize, col: usize) -> f64 {
        self.successes[row][col] as f64 / self.trials as f64
    }

    pub fn row_of(&self, k: usize) -> Option<usize> {
        self.ks.iter().position(|&v| v == k)
    }

    /// Rates along the k axis at one column.
    pub fn column_rates(&self, col: usize) -> Vec<f64> {
        (0..self.ks.len()).map(|r| self.rate(r, col)).collect()
    }

    /// Rates along the column axis at one k.
    pub fn row_rates(&self, row: usize) -> Vec<f64> {
        (0..self.cols.len()).map(|c| self.rate(row, c)).collect()
    }

    pub fn to_csv(&self) -> Csv {
        let mut csv = Csv::new(
            &format!("quasilin-rategrid-{}", self.name),
            &["k", self.col_name.as_str(), "trials", "successes", "rate", "cell_seed"],
        );
        for (r, &k) in self.ks.iter().enumerate() {
            for (c, &v) in self.cols.iter().enumerate() {
                csv.push(vec![
                    Cell::I(k),
                    Cell::F(v),
                    Cell::I(self.trials),
                    Cell::I(self.successes[r][c]),
                    Cell::F(self.rate(r, c)),
                    Cell::U(self.cell_seeds[r][c]),
                ]);
            }
        }
        csv
    }

    pub fn timing_csv(&self) -> Csv {
        let mut csv = Csv::new(
            &format!("quasilin-timing-{}", self.name),
            &["k", self.col_name.as_str(), "wall_seconds"],
        );
        for (r, &k) in self.ks.iter().enumerate() {
            for (c, &v) in self.cols.iter().enumerate() {
                csv.push(vec![Cell::I(k), Cell::F(v), Cell::F(self.wall_seconds[r][c])]);
            }
        }
        csv
    }

    pub fn to_svg(&self, title: &str) -> String {
        Heatmap {
            title,
            row_label: "k",
            col_label: &self.col_name,
            row_ticks: self.ks.iter().map(|k| k.to_string()).collect(),
            col_ticks: self.cols.iter().map(|v| format!("{v:.3}")).collect(),
            values: (0..self.ks.len()).map(|r| self.row_rates(r)).collect(),
        }
        .to_svg()
    }

    /// Rates as a plain table, rows k, for logs.
    pub fn pretty(&self) -> String {
        let mut s = format!("{:>4}", "k");
        for v in &self.cols {
            s.push_str(&format!(" {:>7}", short(*v)));
        }
        s.push('\n');
        for (r, k) in self.ks.iter().enumerate() {
            s.push_str(&format!("{k:>4}"));
            for c in 0..self.cols.len() {
                s.push_str(&format!(" {:>7.2}", self.rate(r, c)));
            }
            s.push('\n');
        }
        s
    }
}

fn short(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e6 {
        format!("{v:.0}")
    } else {
        let s = fmt_f64(v);
        format!("{:.4}", s.parse::<f64>().unwrap_or(v))
    }
}
