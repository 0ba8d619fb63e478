//! Quadrature, root finding and fitting primitives.
//!
//! Everything here is a pure function of its inputs. The adaptive integrator is a
//! global-subdivision Gauss–Kronrod (7/15) scheme; whole-line integrals are truncated at a
//! finite half-width and the truncation is checked at runtime.

use crate::error::NumericsError;

/// Tolerances and truncation for the integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Whole-line integrals are evaluated on `[-w, w]`.
    pub line_truncation_half_width: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            line_truncation_half_width: 40.0,
            max_subdivisions: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(NumericsError::InvalidSpec(
                "abs_tol and rel_tol must be positive".into(),
            ));
        }
        if self.max_subdivisions < 1 {
            return Err(NumericsError::InvalidSpec("max_subdivisions must be at least 1".into()));
        }
        if !(self.line_truncation_half_width > 0.0) {
            return Err(NumericsError::InvalidSpec("truncation half-width must be positive".into()));
        }
        Ok(())
    }
}

/// Result of a quadrature: value, error estimate and (for line integrals) a bound on the
/// discarded tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub tail: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive integral over `[a, b]`.
///
/// Integrable endpoint singularities are allowed since the rule never samples the
/// endpoints.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate, NumericsError> {
    integrate_interval_breaks(f, a, b, &[], spec)
}

/// Adaptive integral over `[a, b]` for an integrand with an inverse-square-root type
/// singularity at `a`, after substituting `x = a + (b − a)s²`.
pub fn integrate_interval_singular_left<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate, NumericsError> {
    if b < a {
        return Err(NumericsError::Domain(format!("interval [{a}, {b}] is reversed")));
    }
    let len = b - a;
    integrate_interval(|s| 2.0 * len * s * f(a + len * s * s), 0.0, 1.0, spec)
}

/// Adaptive integral over `[a, b]` with the initial partition refined at `breaks`
/// (points outside `(a, b)` are ignored).
pub fn integrate_interval_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate, NumericsError> {
    spec.validate()?;
    if !(a <= b) {
        return Err(NumericsError::Domain(format!("interval [{a}, {b}] is reversed")));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, abs_error: 0.0, tail: 0.0 });
    }
    let mut pts: Vec<f64> = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    inner.dedup();
    pts.extend(inner);
    pts.push(b);

    // (lo, hi, value, error)
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    for w in pts.windows(2) {
        let (v, e) = gk15(&f, w[0], w[1]);
        segs.push((w[0], w[1], v, e));
    }
    let width_floor = 64.0 * f64::EPSILON * (b - a).abs().max(a.abs()).max(b.abs());
    loop {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(NumericsError::NonFinite(format!("integrand on [{a}, {b}]")));
        }
        if err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(Estimate { value: total, abs_error: err, tail: 0.0 });
        }
        let worst = segs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.1 - s.0 > width_floor)
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .map(|(i, _)| i);
        let Some(i) = worst else {
            // Nothing left to split; the remaining error sits on unresolvable slivers.
            return Ok(Estimate { value: total, abs_error: err, tail: 0.0 });
        };
        if segs.len() >= spec.max_subdivisions {
            return Err(NumericsError::NotConverged { value: total, error: err });
        }
        let (lo, hi, _, _) = segs[i];
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        segs[i] = (lo, mid, v1, e1);
        segs.push((mid, hi, v2, e2));
    }
}

/// Integral over the whole line of an exponentially decaying integrand.
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<Estimate, NumericsError> {
    integrate_line_breaks(f, &[], spec)
}

/// Whole-line integral with extra partition points (kink centres, for example).
pub fn integrate_line_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate, NumericsError> {
    spec.validate()?;
    let w = spec.line_truncation_half_width;
    let (fl, fr) = (f(-w).abs(), f(w).abs());
    if fl > spec.abs_tol {
        return Err(NumericsError::TailNotDecayed { endpoint: -w, magnitude: fl });
    }
    if fr > spec.abs_tol {
        return Err(NumericsError::TailNotDecayed { endpoint: w, magnitude: fr });
    }
    let mut est = integrate_interval_breaks(f, -w, w, breaks, spec)?;
    est.tail = fl + fr;
    Ok(est)
}

/// `∫₀ᵗ g(α)/√(t−α) dα`, computed after the substitution `α = t − s²`.
pub fn integrate_abel<G: Fn(f64) -> f64>(g: G, t: f64, spec: &QuadratureSpec) -> Result<Estimate, NumericsError> {
    if t < 0.0 {
        return Err(NumericsError::Domain(format!("abel integral needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(Estimate { value: 0.0, abs_error: 0.0, tail: 0.0 });
    }
    integrate_interval(|s| 2.0 * g(t - s * s), 0.0, t.sqrt(), spec)
}

/// Root of `h` in `[lo, hi]` by bisection with secant steps.
///
/// Stops when `|h(x)| <= tol` or the bracket is narrower than `tol`.
pub fn solve_bracketed<H: Fn(f64) -> f64>(h: H, lo: f64, hi: f64, tol: f64) -> Result<f64, NumericsError> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (mut fa, mut fb) = (h(a), h(b));
    if !fa.is_finite() || !fb.is_finite() || fa * fb > 0.0 {
        return Err(NumericsError::BracketInvalid { f_lo: fa, f_hi: fb });
    }
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fb.abs() <= tol {
        return Ok(b);
    }
    let mut last_width = b - a;
    for _ in 0..400 {
        let width = b - a;
        let mut x = b - fb * (b - a) / (fb - fa);
        // Fall back to bisection when the secant point is unusable or progress stalls.
        if !(x > a && x < b) || width > 0.5 * last_width {
            x = 0.5 * (a + b);
        }
        last_width = width;
        let fx = h(x);
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fa * fx < 0.0 {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
        if b - a <= tol {
            return Ok(0.5 * (a + b));
        }
    }
    Ok(0.5 * (a + b))
}

/// Least-squares line through `(ln ε, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit, NumericsError> {
    if points.len() < 3 {
        return Err(NumericsError::TooFewPoints(points.len()));
    }
    for (i, &(e, v)) in points.iter().enumerate() {
        if !(e > 0.0) {
            return Err(NumericsError::NonPositive { index: i, value: e });
        }
        if !(v > 0.0) {
            return Err(NumericsError::NonPositive { index: i, value: v });
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(NumericsError::Domain("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(LogLogFit { slope, intercept, residual: (ss / n).sqrt() })
}

/// Solves a tridiagonal system. `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Uniform radial grid on [a, b].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub a: f64,
    pub b: f64,
    pub cells: usize,
}

impl RadialGrid {
    pub fn uniform(a: f64, b: f64, cells: usize) -> Result<Self, NumericsError> {
        if !(b > a) || cells < 2 {
            return Err(NumericsError::InvalidSpec(format!("bad grid [{a}, {b}] with {cells} cells")));
        }
        Ok(Self { a, b, cells })
    }

    /// Coarsest uniform grid with spacing at most `h_max`.
    pub fn with_max_spacing(a: f64, b: f64, h_max: f64) -> Result<Self, NumericsError> {
        let cells = ((b - a) / h_max - 1e-9).ceil() as usize;
        Self::uniform(a, b, cells.max(2))
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.cells as f64
    }

    pub fn len(&self) -> usize {
        self.cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, j: usize) -> f64 {
        if j == self.cells {
            self.b
        } else {
            self.a + self.h() * j as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.node(j)).collect()
    }

    /// Linear interpolation of nodal values at r (clamped to the grid).
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        let x = ((r - self.a) / self.h()).clamp(0.0, self.cells as f64);
        let k = (x.floor() as usize).min(self.cells - 1);
        let f = x - k as f64;
        values[k] * (1.0 - f) + values[k + 1] * f
    }
}

/// Clamped cubic spline; end slopes come from the cubic through the four nearest nodes.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

fn lagrange_slope(x: &[f64], y: &[f64], at: f64) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut li_prime = 0.0;
        for k in 0..n {
            if k == i {
                continue;
            }
            let mut term = 1.0 / (x[i] - x[k]);
            for j in 0..n {
                if j != i && j != k {
                    term *= (at - x[j]) / (x[i] - x[j]);
                }
            }
            li_prime += term;
        }
        s += y[i] * li_prime;
    }
    s
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, NumericsError> {
        let n = x.len();
        if n != y.len() || n < 4 {
            return Err(NumericsError::TooFewPoints(n.min(y.len())));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(NumericsError::Domain("spline nodes must be strictly increasing".into()));
        }
        let d0 = lagrange_slope(&x[..4], &y[..4], x[0]);
        let dn = lagrange_slope(&x[n - 4..], &y[n - 4..], x[n - 1]);
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let h0 = x[1] - x[0];
        diag[0] = h0 / 3.0;
        sup[0] = h0 / 6.0;
        rhs[0] = (y[1] - y[0]) / h0 - d0;
        for i in 1..n - 1 {
            let hl = x[i] - x[i - 1];
            let hr = x[i + 1] - x[i];
            sub[i] = hl / 6.0;
            diag[i] = (hl + hr) / 3.0;
            sup[i] = hr / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl;
        }
        let hn = x[n - 1] - x[n - 2];
        sub[n - 1] = hn / 6.0;
        diag[n - 1] = hn / 3.0;
        rhs[n - 1] = dn - (y[n - 1] - y[n - 2]) / hn;
        let m = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        Ok(Self { x, y, m })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        if t <= self.x[0] {
            return 0;
        }
        if t >= self.x[n - 1] {
            return n - 2;
        }
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        }
    }

    /// Value, first and second derivative at `t` (cubic extrapolation outside the nodes).
    pub fn eval_all(&self, t: f64) -> (f64, f64, f64) {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (mi, mj) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * mi + (b * b * b - b) * mj) * h * h / 6.0;
        let d = (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * mi + (3.0 * b * b - 1.0) / 6.0 * h * mj;
        let dd = a * mi + b * mj;
        (v, d, dd)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_all(t).0
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.eval_all(t).1
    }
}

/// Piecewise cubic Hermite interpolant from node values and node derivatives.
#[derive(Debug, Clone)]
pub struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl Hermite {
    pub fn new(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>) -> Result<Self, NumericsError> {
        if x.len() < 2 || y.len() != x.len() || dy.len() != x.len() {
            return Err(NumericsError::TooFewPoints(x.len().min(y.len()).min(dy.len())));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(NumericsError::Domain("hermite nodes must be strictly increasing".into()));
        }
        Ok(Self { x, y, dy })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.dy
    }

    /// Value and derivative; `None` outside the node range.
    pub fn eval(&self, t: f64) -> Option<(f64, f64)> {
        let n = self.x.len();
        if !(t >= self.x[0] && t <= self.x[n - 1]) {
            return None;
        }
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.dy[i] * h, self.dy[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1;
        let d = (6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * m1;
        Some((v, d / h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_polynomials_exactly() {
        let s = QuadratureSpec::default();
        let v = integrate_interval(|x| x.powi(9) - 3.0 * x * x, -1.0, 2.0, &s).unwrap().value;
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn reversed_interval_is_rejected() {
        assert!(integrate_interval(|x| x, 1.0, 0.0, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn budget_exhaustion_reports_partial_value() {
        let spec = QuadratureSpec { max_subdivisions: 2, ..QuadratureSpec::default() };
        match integrate_interval(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, &spec) {
            Err(NumericsError::NotConverged { value, error }) => {
                assert!(value.is_finite() && error > 0.0)
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn spline_reproduces_cubics() {
        let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.3).powf(1.3)).collect();
        let y: Vec<f64> = x.iter().map(|t| 1.0 - 2.0 * t + 0.5 * t * t * t).collect();
        let s = CubicSpline::new(x, y).unwrap();
        for &t in &[0.05, 0.77, 1.9, 3.3] {
            let (v, d, _) = s.eval_all(t);
            assert!((v - (1.0 - 2.0 * t + 0.5 * t * t * t)).abs() < 1e-10);
            assert!((d - (-2.0 + 1.5 * t * t)).abs() < 1e-9);
        }
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let sub = [0.0, 1.0, 2.0, 1.0];
        let diag = [4.0, 5.0, 6.0, 5.0];
        let sup = [1.0, 1.0, 1.0, 0.0];
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut r = diag[i] * x_true[i];
                if i > 0 {
                    r += sub[i] * x_true[i - 1];
                }
                if i < 3 {
                    r += sup[i] * x_true[i + 1];
                }
                r
            })
            .collect();
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        for i in 0..4 {
            assert!((x[i] - x_true[i]).abs() < 1e-13);
        }
    }
}
