//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Default relative tolerance for data integrals.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// Default cap on integrand evaluations.
pub const DEFAULT_MAX_EVALS: usize = 1_000_000;

const MAX_DEPTH: u32 = 60;

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// The absolute target is fixed from a first coarse pass, so an integrand that
/// is identically zero converges immediately. Fails when the evaluation budget
/// runs out or the integrand produces a non-finite value.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64, max_evals: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    adaptive_simpson_try(|x| Ok(f(x)), a, b, rel_tol, max_evals)
}

/// Same as [`adaptive_simpson`] for a fallible integrand; the first integrand
/// error aborts the integration and is returned.
pub fn adaptive_simpson_try<F>(f: F, a: f64, b: f64, rel_tol: f64, max_evals: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return adaptive_simpson_try(f, b, a, rel_tol, max_evals).map(|v| -v);
    }

    let mut q = Quad {
        f: &f,
        evals: 0,
        max_evals,
        a,
        b,
    };

    // Coarse pass over four panels to set the absolute target.
    let h = (b - a) / 4.0;
    let xs: Vec<f64> = (0..=4).map(|k| a + k as f64 * h).collect();
    let ys = xs.iter().map(|&x| q.eval(x)).collect::<Result<Vec<_>>>()?;
    let left = simpson(xs[0], xs[2], ys[0], ys[1], ys[2]);
    let right = simpson(xs[2], xs[4], ys[2], ys[3], ys[4]);
    let coarse = left + right;
    let tol = rel_tol * coarse.abs();

    let l = q.refine(
        xs[0],
        xs[2],
        ys[0],
        ys[1],
        ys[2],
        left,
        tol / 2.0,
        MAX_DEPTH,
    )?;
    let r = q.refine(
        xs[2],
        xs[4],
        ys[2],
        ys[3],
        ys[4],
        right,
        tol / 2.0,
        MAX_DEPTH,
    )?;
    Ok(l + r)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

struct Quad<'a, F> {
    f: &'a F,
    evals: usize,
    max_evals: usize,
    a: f64,
    b: f64,
}

impl<F> Quad<'_, F>
where
    F: Fn(f64) -> Result<f64>,
{
    fn eval(&mut self, x: f64) -> Result<f64> {
        self.evals += 1;
        if self.evals > self.max_evals {
            return Err(self.non_convergence());
        }
        let y = (self.f)(x)?;
        if !y.is_finite() {
            return Err(Error::Domain {
                what: "integrand value",
                value: y,
                expected: "a finite value",
            });
        }
        Ok(y)
    }

    fn non_convergence(&self) -> Error {
        Error::QuadratureNonConvergence {
            a: self.a,
            b: self.b,
            evals: self.max_evals,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm)?;
        let frm = self.eval(rm)?;
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 || m <= a || m >= b {
            return Err(self.non_convergence());
        }
        Ok(self.refine(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
            + self.refine(m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
    }
}
