//! Tree parameters: the scale factor and the packing, covering, and relative
//! constants, with the validity constraints construction depends on.
//!
//! The standard constructor derives the relative constant from the scale
//! factor and covering constant (`cr = 2*cc*tau/(tau-4)`), which keeps the
//! parameter space valid by construction. A relaxed constructor exists only
//! for auditing externally supplied trees (for example small hand-built
//! instances with `tau = 2`); trees cannot be built with relaxed parameters.

use crate::error::{Error, Result};
use crate::level::Level;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub tau: f64,
    pub cp: f64,
    pub cc: f64,
    pub cr: f64,
}

impl Params {
    /// Construction-grade parameters. Requires
    /// `tau >= max(5, 2*cc/cp + 2)` and `0 < cp <= cc < cp*(tau-1)/2`;
    /// derives `cr = 2*cc*tau/(tau-4)`.
    pub fn new(tau: f64, cp: f64, cc: f64) -> Result<Params> {
        if !(cp > 0.0) || !cp.is_finite() {
            return Err(Error::Params(format!("cp must be positive, got {cp}")));
        }
        if !(cc >= cp) || !cc.is_finite() {
            return Err(Error::Params(format!("cc must satisfy cc >= cp, got cc={cc}, cp={cp}")));
        }
        let tau_min = (2.0 * cc / cp + 2.0).max(5.0);
        if !(tau >= tau_min) || !tau.is_finite() {
            return Err(Error::Params(format!(
                "tau must satisfy tau >= max(5, 2*cc/cp + 2) = {tau_min}, got {tau}"
            )));
        }
        if !(cc < cp * (tau - 1.0) / 2.0) {
            return Err(Error::Params(format!(
                "cc must satisfy cc < cp*(tau-1)/2 = {}, got {cc}",
                cp * (tau - 1.0) / 2.0
            )));
        }
        let cr = 2.0 * cc * tau / (tau - 4.0);
        Ok(Params { tau, cp, cc, cr })
    }

    /// Validation-only parameters for checking externally supplied trees.
    /// Accepts any `tau > 1`, `0 < cp <= cc`, `cr > 0`.
    pub fn relaxed(tau: f64, cp: f64, cc: f64, cr: f64) -> Result<Params> {
        if !(tau > 1.0) || !tau.is_finite() {
            return Err(Error::Params(format!("tau must exceed 1, got {tau}")));
        }
        if !(cp > 0.0) || !cp.is_finite() {
            return Err(Error::Params(format!("cp must be positive, got {cp}")));
        }
        if !(cc >= cp) || !cc.is_finite() {
            return Err(Error::Params(format!("cc must satisfy cc >= cp, got cc={cc}, cp={cp}")));
        }
        if !(cr > 0.0) || !cr.is_finite() {
            return Err(Error::Params(format!("cr must be positive, got {cr}")));
        }
        Ok(Params { tau, cp, cc, cr })
    }

    /// Whether these parameters satisfy the construction-grade constraints.
    pub fn is_construction_grade(&self) -> bool {
        Params::new(self.tau, self.cp, self.cc)
            .map(|p| (p.cr - self.cr).abs() <= 1e-12 * p.cr.abs())
            .unwrap_or(false)
    }

    /// `constant * tau^level` under the sentinel conventions.
    pub fn radius(&self, level: Level, constant: f64) -> f64 {
        match level {
            Level::NegInf => 0.0,
            Level::PosInf => f64::INFINITY,
            Level::Finite(k) => constant * self.tau.powi(k),
        }
    }

    /// Packing radius `cp * tau^level`.
    pub fn packing_radius(&self, level: Level) -> f64 {
        self.radius(level, self.cp)
    }

    /// Covering radius of an edge whose child sits at `child_level`:
    /// `cc * tau^(child_level + 1)`.
    pub fn covering_radius(&self, child_level: Level) -> f64 {
        self.radius(child_level.succ(), self.cc)
    }

    /// Relative-link radius `cr * tau^level`.
    pub fn relative_radius(&self, level: Level) -> f64 {
        self.radius(level, self.cr)
    }

    /// Inner-ring radius of a cell at `level`: `cp * tau^(level-1) / 2`.
    pub fn inner_ring_radius(&self, level: Level) -> f64 {
        self.radius(level.pred(), self.cp) / 2.0
    }

    /// Slack allowed on the one covering edge between insertion and
    /// propagation: `(cc + cr/tau) * tau^(child_level + 1)`.
    pub fn relaxed_covering_radius(&self, child_level: Level) -> f64 {
        self.radius(child_level.succ(), self.cc + self.cr / self.tau)
    }

    /// Subtree radius coefficient: leaves below a node at level `l` lie within
    /// `cc*tau/(tau-1) * tau^l` of its point.
    pub fn subtree_radius(&self, level: Level) -> f64 {
        self.radius(level, self.cc * self.tau / (self.tau - 1.0))
    }

    /// The approximation factor guaranteed for center-based nearest-neighbor
    /// answers: `cr*tau*(tau-1) / (cr*(tau-1) - cc*tau)`.
    pub fn ann_factor(&self) -> Result<f64> {
        let denom = self.cr * (self.tau - 1.0) - self.cc * self.tau;
        if denom <= 0.0 {
            return Err(Error::Params(format!(
                "approximate-nearest-neighbor guarantee requires cr > cc*tau/(tau-1); got cr={}, cc={}, tau={}",
                self.cr, self.cc, self.tau
            )));
        }
        Ok(self.cr * self.tau * (self.tau - 1.0) / denom)
    }

    /// Constants of the subtree-global net properties implied by the local
    /// ones: `(cp' , cc') = ((cp*(tau-1) - 2*cc) / (2*(tau-1)), cc*tau/(tau-1))`.
    pub fn global_constants(&self) -> (f64, f64) {
        let cpg = (self.cp * (self.tau - 1.0) - 2.0 * self.cc) / (2.0 * (self.tau - 1.0));
        let ccg = self.cc * self.tau / (self.tau - 1.0);
        (cpg, ccg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_defaults_derive_cr() {
        let p = Params::new(6.0, 1.0, 1.0).unwrap();
        assert_eq!(p.cr, 6.0);
        let p = Params::new(5.0, 1.0, 1.0).unwrap();
        assert_eq!(p.cr, 10.0);
        let p = Params::new(8.0, 1.0, 1.0).unwrap();
        assert_eq!(p.cr, 4.0);
    }

    #[test]
    fn tau_below_five_rejected() {
        assert!(Params::new(4.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn covering_constant_too_large_rejected() {
        // cc >= cp*(tau-1)/2 = 2.5
        assert!(Params::new(6.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn tau_bound_scales_with_cc_over_cp() {
        // 2*cc/cp + 2 = 8 > 6
        assert!(Params::new(6.0, 1.0, 2.0).is_err());
        assert!(Params::new(8.5, 1.0, 2.0).is_ok());
    }

    #[test]
    fn relaxed_accepts_small_tau() {
        let p = Params::relaxed(2.0, 1.0, 1.0, 4.0).unwrap();
        assert!(!p.is_construction_grade());
        assert!(Params::relaxed(1.0, 1.0, 1.0, 4.0).is_err());
    }

    #[test]
    fn radius_values() {
        let p = Params::new(6.0, 1.0, 1.0).unwrap();
        assert_eq!(p.radius(Level::Finite(0), 6.0), 6.0);
        assert_eq!(p.radius(Level::NegInf, 6.0), 0.0);
        assert_eq!(p.radius(Level::PosInf, 6.0), f64::INFINITY);
        // relative radius at level 2 of the relaxed line-instance configuration
        let fig = Params::relaxed(2.0, 1.0, 1.0, 4.0).unwrap();
        assert_eq!(fig.radius(Level::Finite(2), fig.cr), 16.0);
    }

    #[test]
    fn ann_factor_defaults() {
        let p = Params::new(6.0, 1.0, 1.0).unwrap();
        assert_eq!(p.ann_factor().unwrap(), 7.5);
    }

    #[test]
    fn global_constants_defaults() {
        let p = Params::new(6.0, 1.0, 1.0).unwrap();
        let (cpg, ccg) = p.global_constants();
        assert!((cpg - 0.3).abs() < 1e-15);
        assert!((ccg - 1.2).abs() < 1e-15);
    }
}
