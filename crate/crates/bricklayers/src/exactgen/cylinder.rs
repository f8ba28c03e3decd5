//! Bounded cylinder functions: test functions of finitely many slopes.

use std::sync::Arc;

/// A bounded real-valued function of the slopes `ω_lo, ..., ω_hi`.
///
/// The evaluator receives exactly the coordinates of its declared support,
/// so it cannot depend on anything outside it. `bound` declares a sup bound
/// checked during expectation sweeps; `f64::INFINITY` disables the check
/// (used for derived functions such as generator images whose magnitude is
/// measured rather than declared).
#[derive(Clone)]
pub struct CylinderFunction {
    lo: i64,
    hi: i64,
    bound: f64,
    eval: Arc<dyn Fn(&[i64]) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for CylinderFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CylinderFunction")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("bound", &self.bound)
            .finish()
    }
}

impl CylinderFunction {
    pub fn new(
        lo: i64,
        hi: i64,
        bound: f64,
        eval: impl Fn(&[i64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(lo <= hi, "empty cylinder support");
        CylinderFunction {
            lo,
            hi,
            bound,
            eval: Arc::new(eval),
        }
    }

    /// Support interval `[lo, hi]` (inclusive).
    pub fn support(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Evaluate on a slice holding `ω_lo..=ω_hi`.
    #[inline]
    pub fn eval(&self, omega: &[i64]) -> f64 {
        debug_assert_eq!(omega.len(), self.width());
        (self.eval)(omega)
    }

    /// The constant function 1 (support pinned to a single irrelevant site).
    pub fn one() -> Self {
        CylinderFunction::new(0, 0, 1.0, |_| 1.0)
    }

    /// `ω_i`.
    pub fn coordinate(i: i64) -> Self {
        CylinderFunction::new(i, i, 1e6, |w| w[0] as f64)
    }

    /// `ω_i²`.
    pub fn coordinate_squared(i: i64) -> Self {
        CylinderFunction::new(i, i, 1e12, |w| (w[0] * w[0]) as f64)
    }

    /// `ω_i ω_{i+1}`.
    pub fn neighbor_product(i: i64) -> Self {
        CylinderFunction::new(i, i + 1, 1e12, |w| (w[0] * w[1]) as f64)
    }

    /// `1{ω_i = 0}`.
    pub fn indicator_zero(i: i64) -> Self {
        CylinderFunction::new(i, i, 1.0, |w| if w[0] == 0 { 1.0 } else { 0.0 })
    }

    /// `φ(ω^{(site,±1)})`: the function evaluated with one coordinate shifted
    /// by `delta` before applying `φ`. If `site` lies outside the support the
    /// function is returned unchanged.
    pub fn shifted_argument(&self, site: i64, delta: i64) -> Self {
        if site < self.lo || site > self.hi {
            return self.clone();
        }
        let idx = (site - self.lo) as usize;
        let inner = self.eval.clone();
        let width = self.width();
        CylinderFunction {
            lo: self.lo,
            hi: self.hi,
            bound: self.bound,
            eval: Arc::new(move |w: &[i64]| {
                let mut buf = [0_i64; 16];
                let buf = &mut buf[..width];
                buf.copy_from_slice(w);
                buf[idx] += delta;
                inner(buf)
            }),
        }
    }
}
