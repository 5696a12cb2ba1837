//! Chebyshev-based convergence constants for alternating Anderson
//! acceleration on linear problems whose iteration matrix has real spectrum
//! in an interval `[a, b]` excluding 0 and 1.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("invalid spectral interval [{a}, {b}]: need 0 < a < b < 1 or 1 < a < b")]
    InvalidInterval { a: f64, b: f64 },
    #[error("the sufficient condition needs a > 1, got a = {a}")]
    NotExpanding { a: f64 },
    #[error("kappa must be at least 1, got {0}")]
    InvalidKappa(f64),
    #[error("degree must be at least 1")]
    ZeroDegree,
}

/// Real interval `[a, b]` containing the spectrum of the iteration matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralInterval {
    a: f64,
    b: f64,
}

impl SpectralInterval {
    pub fn new(a: f64, b: f64) -> Result<Self, BoundsError> {
        let ok = a < b && ((a > 0.0 && b < 1.0) || a > 1.0) && b.is_finite();
        if !ok {
            return Err(BoundsError::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `(2ab - a - b) / (b - a)`: the image of 1 under the affine map taking
    /// `[a, b]` onto `[-1, 1]`, evaluated for the shifted polynomial.
    fn chebyshev_argument(&self) -> f64 {
        (2.0 * self.a * self.b - self.a - self.b) / (self.b - self.a)
    }

    /// `ρ - 1`, where `ρ = b(1-a)/(a(1-b))` for `b < 1` and
    /// `ρ = a(1-b)/(b(1-a))` for `a > 1`, formed without cancellation.
    fn rho_minus_one(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        if b < 1.0 {
            (b - a) / (a * (1.0 - b))
        } else {
            (b - a) / (b * (a - 1.0))
        }
    }
}

/// Chebyshev polynomial of the first kind `T_k(x)`.
///
/// Uses the three-term recurrence on `[-1, 1]` and
/// `½(s^k + s^{-k})`, `s = |x| + √(x² - 1)` outside it.
pub fn chebyshev_t(k: u32, x: f64) -> f64 {
    match k {
        0 => return 1.0,
        1 => return x,
        _ => {}
    }
    if x.abs() <= 1.0 {
        let (mut prev, mut cur) = (1.0, x);
        for _ in 1..k {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    } else {
        let ax = x.abs();
        let s = ax + (ax * ax - 1.0).sqrt();
        let v = 0.5 * (s.powi(k as i32) + s.powi(-(k as i32)));
        if x < 0.0 && k % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// `C(a, b, m) = 1 / |T_m((2ab - a - b)/(b - a))|`.
pub fn bound_c(iv: &SpectralInterval, m: u32) -> Result<f64, BoundsError> {
    if m == 0 {
        return Err(BoundsError::ZeroDegree);
    }
    Ok(1.0 / chebyshev_t(m, iv.chebyshev_argument()).abs())
}

/// Closed-form upper estimate `ε(a, b, k) = 2((√ρ - 1)/(√ρ + 1))^k` of
/// [`bound_c`].
pub fn bound_eps(iv: &SpectralInterval, k: u32) -> Result<f64, BoundsError> {
    if k == 0 {
        return Err(BoundsError::ZeroDegree);
    }
    let rm1 = iv.rho_minus_one();
    let sr = (1.0 + rm1).sqrt();
    // (√ρ - 1)/(√ρ + 1) = (ρ - 1)/(√ρ + 1)²
    let q = rm1 / ((sr + 1.0) * (sr + 1.0));
    Ok(2.0 * q.powi(k as i32))
}

/// Value of `2κ((√ρ - 1)/(√ρ + 1))^m b^{t+1}` and whether it is below 1, in
/// which case the subsequence `x_{jp}` converges.
pub fn sufficient_condition(
    iv: &SpectralInterval,
    m: u32,
    t: u32,
    kappa: f64,
) -> Result<(f64, bool), BoundsError> {
    if iv.a <= 1.0 {
        return Err(BoundsError::NotExpanding { a: iv.a });
    }
    if !(kappa >= 1.0) {
        return Err(BoundsError::InvalidKappa(kappa));
    }
    let value = kappa * bound_eps(iv, m)? * iv.b.powi(t as i32 + 1);
    Ok((value, value < 1.0))
}

/// Window sizes of the reference table.
pub const TABLE1_M: [u32; 4] = [2, 4, 10, 15];
/// Spectral intervals of the reference table.
pub const TABLE1_INTERVALS: [(f64, f64); 5] = [(0.3, 0.9), (1.5, 3.0), (2.0, 5.0), (10.0, 30.0), (20.0, 50.0)];

/// One table entry: `C·b^{m+1}` and `ε·b^{m+1}` with `t = m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Cell {
    pub m: u32,
    pub a: f64,
    pub b: f64,
    pub c_value: f64,
    pub eps_value: f64,
}

impl Table1Cell {
    /// `"C(ε)"` rounded to four decimals, or `"-"` when `C·b^{m+1} > 1`.
    pub fn render(&self) -> String {
        if self.c_value > 1.0 {
            return "-".to_owned();
        }
        let eps = if self.eps_value > 1.0 {
            "-".to_owned()
        } else {
            round4(self.eps_value)
        };
        format!("{}({})", round4(self.c_value), eps)
    }
}

/// Four decimals, rounding half away from zero.
pub fn round4(v: f64) -> String {
    format!("{:.4}", (v * 1e4).round() / 1e4)
}

/// The full table, row-major over [`TABLE1_M`] × [`TABLE1_INTERVALS`].
pub fn table1() -> Vec<Table1Cell> {
    let mut cells = Vec::with_capacity(TABLE1_M.len() * TABLE1_INTERVALS.len());
    for &m in &TABLE1_M {
        for &(a, b) in &TABLE1_INTERVALS {
            let iv = SpectralInterval::new(a, b).expect("table intervals are valid");
            let scale = b.powi(m as i32 + 1);
            cells.push(Table1Cell {
                m,
                a,
                b,
                c_value: bound_c(&iv, m).expect("m > 0") * scale,
                eps_value: bound_eps(&iv, m).expect("m > 0") * scale,
            });
        }
    }
    cells
}

/// Aligned text rendering of [`table1`].
pub fn table1_text() -> String {
    let cells = table1();
    let ncol = TABLE1_INTERVALS.len();
    let mut header = vec!["m".to_owned()];
    header.extend(TABLE1_INTERVALS.iter().map(|(a, b)| format!("[{a}, {b}]")));
    let mut rows = vec![header];
    for (i, &m) in TABLE1_M.iter().enumerate() {
        let mut row = vec![m.to_string()];
        row.extend(cells[i * ncol..(i + 1) * ncol].iter().map(Table1Cell::render));
        rows.push(row);
    }
    let widths: Vec<usize> = (0..=ncol)
        .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(s, &w)| format!("{s:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", line.join("  "));
    }
    out
}

/// CSV rendering of [`table1`], one line per cell.
pub fn table1_csv() -> String {
    let mut out = String::from("m,a,b,c_times_b_pow,eps_times_b_pow,cell\n");
    for c in table1() {
        let _ = writeln!(
            out,
            "{},{},{},{:.6e},{:.6e},{}",
            c.m,
            c.a,
            c.b,
            c.c_value,
            c.eps_value,
            c.render()
        );
    }
    out
}
