//! Small numerical kernels shared across modules.

/// Factored periodic tridiagonal system. Row `i` reads
/// `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1] = r[i]`, indices mod `n`.
#[derive(Debug, Clone)]
pub struct CyclicTridiagonal {
    n: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    modified: Vec<f64>,
    gamma: f64,
    alpha: f64,
    z: Vec<f64>,
}

impl CyclicTridiagonal {
    /// Requires `n ≥ 3` and a nonsingular system.
    pub fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        assert!(n >= 3 && lower.len() == n && upper.len() == n);
        let alpha = lower[0];
        let beta = upper[n - 1];
        let gamma = -diag[0];
        let mut modified = diag.to_vec();
        modified[0] -= gamma;
        modified[n - 1] -= alpha * beta / gamma;
        let mut me = Self {
            n,
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            modified,
            gamma,
            alpha,
            z: Vec::new(),
        };
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = beta;
        me.z = me.thomas(&u);
        me
    }

    fn thomas(&self, r: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut denom = self.modified[0];
        x[0] = r[0] / denom;
        for i in 1..n {
            c[i] = self.upper[i - 1] / denom;
            denom = self.modified[i] - self.lower[i] * c[i];
            x[i] = (r[i] - self.lower[i] * x[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= c[i + 1] * next;
        }
        x
    }

    pub fn solve(&self, r: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = self.thomas(r);
        let fact = (x[0] + self.alpha * x[n - 1] / self.gamma)
            / (1.0 + self.z[0] + self.alpha * self.z[n - 1] / self.gamma);
        for (xi, zi) in x.iter_mut().zip(&self.z) {
            *xi -= fact * zi;
        }
        x
    }
}

/// Central first derivative with one Richardson step, error `O(h⁴)`.
pub fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Richardson extrapolation of a ladder `values[k] = A(h/2^k)` for a quantity
/// with an even error expansion in `h`.
pub fn richardson_even(values: &[f64]) -> f64 {
    let mut t = values.to_vec();
    let mut factor = 4.0;
    for level in 1..t.len() {
        for k in (level..t.len()).rev() {
            t[k] = (factor * t[k] - t[k - 1]) / (factor - 1.0);
        }
        factor *= 4.0;
    }
    *t.last().expect("nonempty ladder")
}

/// Least-squares line `y ≈ intercept + slope·x`; returns `(slope, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Quintic Hermite table on a uniform grid of `[lo, hi]` interpolating
/// values, first and second derivatives; the interpolant is `C²`.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    lo: f64,
    step: f64,
    v: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl HermiteTable {
    pub fn new(lo: f64, hi: f64, v: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Self {
        assert!(v.len() >= 2 && v.len() == d1.len() && v.len() == d2.len());
        let step = (hi - lo) / (v.len() - 1) as f64;
        Self { lo, step, v, d1, d2 }
    }

    /// Value and first derivative of the interpolant; arguments are clamped.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let cells = self.v.len() - 1;
        let s = ((x - self.lo) / self.step).clamp(0.0, cells as f64);
        let j = (s.floor() as usize).min(cells - 1);
        let t = s - j as f64;
        let h = self.step;
        let (t2, t3, t4, t5) = (t * t, t * t * t, t.powi(4), t.powi(5));
        let b = [
            1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5),
            10.0 * t3 - 15.0 * t4 + 6.0 * t5,
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            0.5 * (t3 - 2.0 * t4 + t5),
        ];
        let db = [
            -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
            0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4),
            30.0 * t2 - 60.0 * t3 + 30.0 * t4,
            -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
            0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4),
        ];
        let c = [
            self.v[j],
            h * self.d1[j],
            h * h * self.d2[j],
            self.v[j + 1],
            h * self.d1[j + 1],
            h * h * self.d2[j + 1],
        ];
        let val = (0..6).map(|k| b[k] * c[k]).sum();
        let der = (0..6).map(|k| db[k] * c[k]).sum::<f64>() / h;
        (val, der)
    }
}

/// Cubic spline with prescribed end slopes.
#[derive(Debug, Clone)]
pub struct ClampedSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl ClampedSpline {
    /// `x` strictly increasing with at least two points.
    pub fn new(x: Vec<f64>, y: Vec<f64>, slope_lo: f64, slope_hi: f64) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        // Second-derivative system for the clamped spline.
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        let h0 = x[1] - x[0];
        b[0] = h0 / 3.0;
        c[0] = h0 / 6.0;
        r[0] = (y[1] - y[0]) / h0 - slope_lo;
        for i in 1..n - 1 {
            let hl = x[i] - x[i - 1];
            let hr = x[i + 1] - x[i];
            a[i] = hl / 6.0;
            b[i] = (hl + hr) / 3.0;
            c[i] = hr / 6.0;
            r[i] = (y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl;
        }
        let hn = x[n - 1] - x[n - 2];
        a[n - 1] = hn / 6.0;
        b[n - 1] = hn / 3.0;
        r[n - 1] = slope_hi - (y[n - 1] - y[n - 2]) / hn;
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = r[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
        }
        Self { x, y, m }
    }

    fn cell(&self, t: f64) -> usize {
        match self.x.binary_search_by(|v| v.partial_cmp(&t).expect("finite abscissa")) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.clamp(1, self.x.len() - 1) - 1,
        }
    }

    /// Value, first and second derivative.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let i = self.cell(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1] + ((a.powi(3) - a) * m0 + (b.powi(3) - b) * m1) * h * h / 6.0;
        let d = (self.y[i + 1] - self.y[i]) / h + (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let dd = a * m0 + b * m1;
        (v, d, dd)
    }

    /// `∫_{x₀}^{t}` of the spline.
    pub fn integral(&self, t: f64) -> f64 {
        let piece = |i: usize, upto: f64| {
            let h = self.x[i + 1] - self.x[i];
            let b = (upto - self.x[i]) / h;
            let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i], self.m[i + 1]);
            // Antiderivative in the local variable b ∈ [0, 1], with a = 1 − b.
            let a_part = |b: f64| {
                let a = 1.0 - b;
                -(a * a) / 2.0 * y0 + (-(a.powi(4)) / 4.0 + a * a / 2.0) * m0 * h * h / 6.0
            };
            let b_part = |b: f64| b * b / 2.0 * y1 + (b.powi(4) / 4.0 - b * b / 2.0) * m1 * h * h / 6.0;
            h * ((a_part(b) + b_part(b)) - (a_part(0.0) + b_part(0.0)))
        };
        let i = self.cell(t);
        (0..i).map(|k| piece(k, self.x[k + 1])).sum::<f64>() + piece(i, t)
    }
}
