//! Characteristic roots of scalar autonomous equations
//! `x' = a x + b x(t - tau) + c0 int_{-tau}^0 x(t + theta) dtheta`.
//!
//! The characteristic function is used in its divided form
//! `h(l) = l - a - b e^{-l tau} - c0 (1 - e^{-l tau}) / l`, which is entire; multiplying
//! through by `l` would add the spurious root `l = 0`.

use num_complex::Complex64 as C;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicEquation {
    pub a: f64,
    pub b: f64,
    pub c0: f64,
    pub tau: f64,
}

/// Rectangle of Newton starting points in the closed upper half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSearch {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
    pub spacing: f64,
    pub max_iter: usize,
}

/// `(1 - e^{-z tau}) / z` and its derivative.
fn kernel_factor(z: C, tau: f64) -> (C, C) {
    let zt = z * tau;
    if zt.norm() < 0.5 {
        // sum_k coef_k z^k with coef_k = (-1)^k tau^{k+1} / (k+1)!
        let mut e = C::new(0.0, 0.0);
        let mut de = C::new(0.0, 0.0);
        let mut coef = tau;
        let mut zpow = C::new(1.0, 0.0);
        let mut zprev = C::new(0.0, 0.0);
        for k in 0..24 {
            e += zpow * coef;
            de += zprev * (coef * k as f64);
            zprev = zpow;
            zpow *= z;
            coef *= -tau / (k as f64 + 2.0);
        }
        (e, de)
    } else {
        let ex = (-zt).exp();
        let e = (C::new(1.0, 0.0) - ex) / z;
        let de = (ex * tau - e) / z;
        (e, de)
    }
}

impl CharacteristicEquation {
    /// `(h(z), h'(z))`.
    pub fn eval(&self, z: C) -> (C, C) {
        let ex = (-z * self.tau).exp();
        let mut h = z - self.a - ex * self.b;
        let mut dh = C::new(1.0, 0.0) + ex * (self.b * self.tau);
        if self.c0 != 0.0 {
            let (e, de) = kernel_factor(z, self.tau);
            h -= e * self.c0;
            dh -= de * self.c0;
        }
        (h, dh)
    }

    /// Search rectangle sized from the coefficient magnitudes.
    pub fn default_search(&self) -> RootSearch {
        let bound = self.a.abs() + self.b.abs() + self.c0.abs() * self.tau;
        RootSearch {
            re_min: -bound - 3.0 / self.tau,
            re_max: bound + 1.0,
            im_max: bound + 4.0 * std::f64::consts::PI / self.tau,
            spacing: 0.25f64.min(0.25 / self.tau),
            max_iter: 60,
        }
    }

    /// Distinct roots with `Im >= 0` reached by deflated Newton from every grid point.
    pub fn roots(&self, search: &RootSearch) -> Result<Vec<C>> {
        if !(search.spacing > 0.0) || !(search.re_max > search.re_min) || !(search.im_max >= 0.0) {
            return Err(HarnessError::Oracle("degenerate search rectangle".into()));
        }
        let nre = ((search.re_max - search.re_min) / search.spacing).ceil() as usize + 1;
        let nim = (search.im_max / search.spacing).ceil() as usize + 1;
        let mut found: Vec<C> = Vec::new();
        for i in 0..nre {
            for j in 0..nim {
                let z0 = C::new(search.re_min + i as f64 * search.spacing, j as f64 * search.spacing);
                if let Some(z) = self.deflated_newton(z0, &found, search.max_iter) {
                    let z = if z.im < 0.0 { z.conj() } else { z };
                    let z = if z.im.abs() < 1e-12 * (1.0 + z.norm()) {
                        C::new(z.re, 0.0)
                    } else {
                        z
                    };
                    if found.iter().all(|r| (r - z).norm() > 1e-8 * (1.0 + z.norm())) {
                        found.push(z);
                    }
                }
            }
        }
        if found.is_empty() {
            return Err(HarnessError::Oracle("Newton found no characteristic root".into()));
        }
        found.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
        Ok(found)
    }

    /// Root with the largest real part (upper member of a conjugate pair).
    pub fn rightmost(&self) -> Result<C> {
        Ok(self.roots(&self.default_search())?[0])
    }

    fn deflated_newton(&self, mut z: C, known: &[C], max_iter: usize) -> Option<C> {
        let mut converged = false;
        for _ in 0..max_iter {
            let (h, dh) = self.eval(z);
            if h.norm() == 0.0 {
                converged = true;
                break;
            }
            let mut q = dh / h;
            for r in known {
                q -= (z - r).inv();
                if r.im != 0.0 {
                    q -= (z - r.conj()).inv();
                }
            }
            let step = q.inv();
            if !step.re.is_finite() || !step.im.is_finite() {
                return None;
            }
            z -= step;
            if z.norm() > 1e6 {
                return None;
            }
            if step.norm() < 1e-14 * (1.0 + z.norm()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return None;
        }
        // polish on the undeflated function
        for _ in 0..3 {
            let (h, dh) = self.eval(z);
            if h.norm() == 0.0 || dh.norm() == 0.0 {
                break;
            }
            z -= h / dh;
        }
        let (h, dh) = self.eval(z);
        let scale = 1.0 + z.norm() + self.a.abs() + self.b.abs() * (-z.re * self.tau).exp() + self.c0.abs() * self.tau;
        (h.norm() < 1e-12 * scale && dh.norm() > 0.0).then_some(z)
    }
}
