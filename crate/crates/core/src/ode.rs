//! Fixed-step explicit Runge–Kutta integration in `f64` and convergence
//! measurement.
//!
//! The two test problems trace the logarithmic spiral
//! `z(t) = (t·sin ln t, t·cos ln t)`: once as the autonomous planar system
//! `z' = (z₂ + z₁, z₂ − z₁)/‖z‖` in `t`, once as the scalar non-autonomous
//! equation `dy/dx = (y − x)/(y + x)` obtained by using `x = z₁` as the
//! independent variable. Both run from angle `π/10` to `π/2`, where the exact
//! endpoint is `(e^{π/2}, 0)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::conditions::Tableau;
use crate::parallel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("tableau is not explicit")]
    NotExplicit,
    #[error("step count must be at least 1")]
    ZeroSteps,
    #[error("non-finite state after step {step}")]
    NonFinite { step: usize },
    #[error("problem `{0}` has no exact reference solution")]
    NoReference(String),
    #[error("zero error at h = {h}; cannot take its logarithm")]
    ZeroError { h: f64 },
    #[error("need at least two usable samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    /// `y' = f(y, x)` with `y` scalar
    ScalarNonautonomous,
    /// `z' = f(z)` with `z ∈ Rᵈ`
    AutonomousVector,
}

type Rhs = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;

/// An initial value problem on `[start, end]`.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub kind: ProblemKind,
    pub initial: Vec<f64>,
    pub start: f64,
    pub end: f64,
    pub reference: Option<Vec<f64>>,
    rhs: Arc<Rhs>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("initial", &self.initial)
            .field("start", &self.start)
            .field("end", &self.end)
            .field("reference", &self.reference)
            .finish()
    }
}

impl Problem {
    /// Scalar `y' = f(y, x)`.
    pub fn scalar(
        name: &str,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        start: f64,
        end: f64,
        initial: f64,
        reference: Option<f64>,
    ) -> Problem {
        assert!(end > start, "interval must be nondegenerate");
        Problem {
            name: name.to_string(),
            kind: ProblemKind::ScalarNonautonomous,
            initial: vec![initial],
            start,
            end,
            reference: reference.map(|r| vec![r]),
            rhs: Arc::new(move |x, y, out| out[0] = f(y[0], x)),
        }
    }

    /// Autonomous `z' = f(z)`; `f` writes the derivative into its second argument.
    pub fn autonomous(
        name: &str,
        f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        start: f64,
        end: f64,
        initial: Vec<f64>,
        reference: Option<Vec<f64>>,
    ) -> Problem {
        assert!(end > start, "interval must be nondegenerate");
        if let Some(r) = &reference {
            assert_eq!(r.len(), initial.len());
        }
        Problem {
            name: name.to_string(),
            kind: ProblemKind::AutonomousVector,
            initial,
            start,
            end,
            reference,
            rhs: Arc::new(move |_, z, out| f(z, out)),
        }
    }

    pub fn dimension(&self) -> usize {
        self.initial.len()
    }

    pub fn eval(&self, x: f64, y: &[f64], out: &mut [f64]) {
        (self.rhs)(x, y, out)
    }
}

fn spiral_start() -> (f64, f64, f64) {
    let theta0 = PI / 10.0;
    let t0 = theta0.exp();
    (t0, t0 * theta0.sin(), t0 * theta0.cos())
}

/// `dy/dx = (y − x)/(y + x)` on `[e^{π/10} sin(π/10), e^{π/2}]` with
/// `y₀ = e^{π/10} cos(π/10)`; the exact endpoint value is `0`.
///
/// The right-hand side returns NaN when `y + x ≤ 0`, which the integrator
/// reports as a non-finite state.
pub fn spiral_scalar() -> Problem {
    let (_, x0, y0) = spiral_start();
    let x1 = (PI / 2.0).exp();
    Problem::scalar(
        "spiral-scalar",
        |y, x| {
            let den = y + x;
            if den > 0.0 {
                (y - x) / den
            } else {
                f64::NAN
            }
        },
        x0,
        x1,
        y0,
        Some(0.0),
    )
}

/// `z' = (z₂ + z₁, z₂ − z₁)/‖z‖` on `t ∈ [e^{π/10}, e^{π/2}]`; the exact
/// endpoint is `(e^{π/2}, 0)`.
pub fn spiral_vector() -> Problem {
    let (t0, x0, y0) = spiral_start();
    let t1 = (PI / 2.0).exp();
    Problem::autonomous(
        "spiral-vector",
        |z, out| {
            let r = z[0].hypot(z[1]);
            out[0] = (z[1] + z[0]) / r;
            out[1] = (z[1] - z[0]) / r;
        },
        t0,
        t1,
        vec![x0, y0],
        Some(vec![t1, 0.0]),
    )
}

/// A tableau rounded once to `f64`.
#[derive(Clone, Debug)]
pub struct FloatTableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl FloatTableau {
    pub fn new(tab: &Tableau) -> Result<Self, OdeError> {
        if !tab.is_explicit() {
            return Err(OdeError::NotExplicit);
        }
        let (a, b, c) = tab.to_f64();
        Ok(FloatTableau { a, b, c })
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }
}

/// Final state after `steps` equal steps of `h = (end − start)/steps`.
pub fn integrate(tab: &Tableau, prob: &Problem, steps: usize) -> Result<Vec<f64>, OdeError> {
    integrate_float(&FloatTableau::new(tab)?, prob, steps)
}

pub fn integrate_float(tab: &FloatTableau, prob: &Problem, steps: usize) -> Result<Vec<f64>, OdeError> {
    if steps == 0 {
        return Err(OdeError::ZeroSteps);
    }
    let s = tab.stages();
    let dim = prob.dimension();
    let h = (prob.end - prob.start) / steps as f64;
    let mut y = prob.initial.clone();
    let mut k = vec![vec![0.0; dim]; s];
    let mut stage = vec![0.0; dim];
    for n in 0..steps {
        let x = prob.start + n as f64 * h;
        for i in 0..s {
            stage.copy_from_slice(&y);
            for (j, kj) in k.iter().enumerate().take(i) {
                let aij = tab.a[i][j];
                if aij != 0.0 {
                    for (st, kv) in stage.iter_mut().zip(kj) {
                        *st += h * aij * kv;
                    }
                }
            }
            prob.eval(x + tab.c[i] * h, &stage, &mut k[i]);
        }
        for (i, ki) in k.iter().enumerate() {
            for (yv, kv) in y.iter_mut().zip(ki) {
                *yv += h * tab.b[i] * kv;
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::NonFinite { step: n + 1 });
        }
    }
    Ok(y)
}

/// Errors below this are dominated by rounding and left out of slope fits.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub steps: usize,
    pub h: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceResult {
    pub samples: Vec<Sample>,
    /// Least-squares slope of `ln(error)` against `ln(h)`.
    pub slope: f64,
}

impl ConvergenceResult {
    /// `h,error` rows followed by `# slope=<value>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,error\n");
        for s in &self.samples {
            out.push_str(&format!("{},{}\n", s.h, s.error));
        }
        out.push_str(&format!("# slope={}\n", self.slope));
        out
    }
}

/// Parses CSV written by [`ConvergenceResult::to_csv`] into `(h, error)` rows and the slope.
pub fn parse_convergence_csv(text: &str) -> Option<(Vec<(f64, f64)>, f64)> {
    let mut lines = text.lines();
    if lines.next()? != "h,error" {
        return None;
    }
    let mut rows = Vec::new();
    let mut slope = None;
    for line in lines {
        if let Some(v) = line.strip_prefix("# slope=") {
            slope = Some(v.parse().ok()?);
        } else if !line.is_empty() {
            let (h, e) = line.split_once(',')?;
            rows.push((h.parse().ok()?, e.parse().ok()?));
        }
    }
    Some((rows, slope?))
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Step counts for `count` step sizes log-equally spaced in `[h_min, h_max]`,
/// each rounded to a whole number of steps over the problem's interval.
pub fn step_grid(prob: &Problem, h_min: f64, h_max: f64, count: usize) -> Result<Vec<usize>, OdeError> {
    if !(h_min > 0.0 && h_max > h_min) || count < 2 {
        return Err(OdeError::InvalidGrid(format!("need 0 < h_min < h_max and count ≥ 2, got {h_min},{h_max},{count}")));
    }
    let len = prob.end - prob.start;
    let (lo, hi) = (h_min.ln(), h_max.ln());
    let mut steps: Vec<usize> = (0..count)
        .map(|k| {
            let h = (lo + (hi - lo) * k as f64 / (count - 1) as f64).exp();
            ((len / h).round() as usize).max(1)
        })
        .collect();
    steps.sort_unstable();
    steps.dedup();
    if steps.len() < 2 {
        return Err(OdeError::InvalidGrid("grid collapses to a single step count".into()));
    }
    Ok(steps)
}

/// Runs the method at each step count and fits the observed order.
pub fn convergence_study(tab: &Tableau, prob: &Problem, step_counts: &[usize]) -> Result<ConvergenceResult, OdeError> {
    let reference = prob.reference.clone().ok_or_else(|| OdeError::NoReference(prob.name.clone()))?;
    let ftab = FloatTableau::new(tab)?;
    let mut counts = step_counts.to_vec();
    counts.sort_unstable();
    counts.dedup();
    if counts.len() < 2 {
        return Err(OdeError::TooFewSamples(counts.len()));
    }
    let runs: Vec<Result<Sample, OdeError>> = parallel::install(|| {
        counts
            .par_iter()
            .map(|&steps| {
                let y = integrate_float(&ftab, prob, steps)?;
                let error = y.iter().zip(&reference).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                let h = (prob.end - prob.start) / steps as f64;
                if error == 0.0 {
                    return Err(OdeError::ZeroError { h });
                }
                Ok(Sample { steps, h, error })
            })
            .collect()
    });
    let mut samples = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    samples.sort_by(|a, b| a.h.total_cmp(&b.h));
    let usable: Vec<&Sample> = samples.iter().filter(|s| s.error >= ROUNDOFF_FLOOR).collect();
    if usable.len() < 2 {
        return Err(OdeError::TooFewSamples(usable.len()));
    }
    let xs: Vec<f64> = usable.iter().map(|s| s.h.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|s| s.error.ln()).collect();
    let slope = fit_slope(&xs, &ys);
    Ok(ConvergenceResult { samples, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::builtin;

    #[test]
    fn euler_one_step_exponential() {
        let prob = Problem::autonomous("exp", |y, out| out[0] = y[0], 0.0, 1.0, vec![1.0], Some(vec![1f64.exp()]));
        let y = integrate(&builtin("euler").unwrap(), &prob, 1).unwrap();
        assert_eq!(y, vec![2.0]);
        assert_eq!(integrate(&builtin("euler").unwrap(), &prob, 0), Err(OdeError::ZeroSteps));
    }

    #[test]
    fn spiral_constants() {
        let sc = spiral_scalar();
        assert!((sc.end - 4.810477380965351).abs() < 1e-12);
        assert_eq!(sc.reference, Some(vec![0.0]));
        let theta = PI / 10.0;
        assert!((sc.initial[0] - theta.exp() * theta.cos()).abs() < 1e-15);
        assert!((sc.start - theta.exp() * theta.sin()).abs() < 1e-15);

        let sv = spiral_vector();
        assert_eq!(sv.initial, vec![sc.start, sc.initial[0]]);
        assert_eq!(sv.reference.as_ref().unwrap()[0], sc.end);
        let mut out = [0.0; 2];
        sv.eval(0.0, &[0.0, 1.0], &mut out);
        assert_eq!(out, [1.0, 1.0]);
    }

    #[test]
    fn rk4_vector_spiral() {
        let y = integrate(&builtin("rk4").unwrap(), &spiral_vector(), 1000).unwrap();
        assert!((y[0] - (PI / 2.0).exp()).abs() < 1e-8);
        assert!(y[1].abs() < 1e-8);
    }

    #[test]
    fn polynomial_solutions_are_exact() {
        let rk4 = builtin("rk4").unwrap();
        for q in 1..=4 {
            let qf = q as f64;
            let prob = Problem::scalar("poly", move |_, x| qf * x.powi(q - 1), 0.5, 1.5, 0.5f64.powi(q), Some(1.5f64.powi(q)));
            let y = integrate(&rk4, &prob, 1).unwrap();
            assert!((y[0] - 1.5f64.powi(q)).abs() < 1e-12, "q = {q}");
        }
    }

    #[test]
    fn rejects_implicit_tableaus() {
        use crate::exact::ExactScalar;
        let half = ExactScalar::ratio(1, 2);
        let tab = Tableau::new(vec![vec![half.clone()]], vec![ExactScalar::one()], vec![half]).unwrap();
        assert_eq!(integrate(&tab, &spiral_scalar(), 10), Err(OdeError::NotExplicit));
    }

    #[test]
    fn non_finite_state_is_reported() {
        let prob = Problem::scalar("blowup", |y, _| y * y, 0.0, 20.0, 1.0, None);
        let err = integrate(&builtin("euler").unwrap(), &prob, 20).unwrap_err();
        assert!(matches!(err, OdeError::NonFinite { .. }));
    }

    #[test]
    fn slope_fit_is_exact_on_power_laws() {
        let xs: Vec<f64> = [0.1f64, 0.05, 0.02].iter().map(|h| h.ln()).collect();
        let ys: Vec<f64> = [0.1f64, 0.05, 0.02].iter().map(|h| (3.0 * h.powi(4)).ln()).collect();
        assert!((fit_slope(&xs, &ys) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn grid_and_csv() {
        let prob = spiral_vector();
        let steps = step_grid(&prob, 10f64.powf(-1.5), 10f64.powf(-0.75), 4).unwrap();
        assert_eq!(steps.len(), 4);
        assert!(step_grid(&prob, 0.1, 0.01, 4).is_err());
        let res = convergence_study(&builtin("rk4").unwrap(), &prob, &steps).unwrap();
        let (rows, slope) = parse_convergence_csv(&res.to_csv()).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(slope, res.slope);
        assert_eq!(rows[0], (res.samples[0].h, res.samples[0].error));
    }

    #[test]
    fn convergence_requires_reference() {
        let prob = Problem::scalar("noref", |y, _| y, 0.0, 1.0, 1.0, None);
        assert!(matches!(
            convergence_study(&builtin("rk4").unwrap(), &prob, &[10, 20]),
            Err(OdeError::NoReference(_))
        ));
        assert!(matches!(
            convergence_study(&builtin("rk4").unwrap(), &spiral_vector(), &[10]),
            Err(OdeError::TooFewSamples(1))
        ));
    }
}
