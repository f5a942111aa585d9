use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::bump::{smooth_step, smooth_step_prime, smooth_step_second};

/// Largest cutoff level the desk-scale experiments support.
pub const MAX_LEVEL: u32 = 4;

/// Junction times `t_n = 1 - (n+1)^-2`, interval lengths and the viscosity for cutoff `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSchedule {
    pub m: u32,
}

impl TimeSchedule {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 || m > MAX_LEVEL {
            return Err(Error::Config(format!("cutoff level m = {m} outside 1..={MAX_LEVEL}")));
        }
        Ok(TimeSchedule { m })
    }

    pub fn junction(n: u32) -> f64 {
        let q = (n + 1) as f64;
        1.0 - 1.0 / (q * q)
    }

    /// `Delta t_n = t_{n+1} - t_n`.
    pub fn interval(n: u32) -> f64 {
        let (a, b) = ((n + 1) as f64, (n + 2) as f64);
        (b * b - a * a) / (a * a * b * b)
    }

    /// `mu_m = m^10 5^{-2m}`.
    pub fn viscosity(&self) -> f64 {
        (self.m as f64).powi(10) * 25f64.powi(-(self.m as i32))
    }

    /// `t_{m+1}`, after which the velocity vanishes and the density is frozen.
    pub fn end(&self) -> f64 {
        Self::junction(self.m + 1)
    }

    /// Interval index `n` with `t_n <= t < t_{n+1}` and the local coordinate `(t - t_n) / Delta t_n`.
    pub fn locate(t: f64) -> (u32, f64) {
        if t <= 0.0 {
            return (0, 0.0);
        }
        let guess = if t < 1.0 { (1.0 / (1.0 - t).sqrt()).floor() as i64 - 1 } else { i64::from(u32::MAX - 2) };
        let mut n = guess.clamp(0, i64::from(u32::MAX - 2)) as u32;
        while n > 0 && Self::junction(n) > t {
            n -= 1;
        }
        while Self::junction(n + 1) <= t {
            n += 1;
        }
        (n, (t - Self::junction(n)) / Self::interval(n))
    }
}

/// The reparametrisation `eta(t) = t_n + Delta t_n S((t - t_n) / Delta t_n)` on each interval.
#[derive(Debug, Clone, Copy, Default)]
pub struct Reparametrisation;

impl Reparametrisation {
    pub fn eta(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return 1.0;
        }
        let (n, x) = TimeSchedule::locate(t);
        (TimeSchedule::junction(n) + TimeSchedule::interval(n) * smooth_step(x)).min(TimeSchedule::junction(n + 1))
    }

    pub fn eta_prime(&self, t: f64) -> f64 {
        if !(0.0..1.0).contains(&t) {
            return 0.0;
        }
        smooth_step_prime(TimeSchedule::locate(t).1)
    }

    pub fn eta_second(&self, t: f64) -> f64 {
        if !(0.0..1.0).contains(&t) {
            return 0.0;
        }
        let (n, x) = TimeSchedule::locate(t);
        smooth_step_second(x) / TimeSchedule::interval(n)
    }

    /// `sup |eta'|` on `[t_n, t_{n+1}]`, sampled at `points` interior times.
    pub fn sup_prime(&self, n: u32, points: usize) -> f64 {
        let (a, h) = (TimeSchedule::junction(n), TimeSchedule::interval(n));
        (1..points).map(|i| self.eta_prime(a + h * i as f64 / points as f64).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fit::loglog_slope;

    #[test]
    fn junctions_increase_to_one() {
        let mut prev = -1.0;
        for n in 0..=20 {
            let t = TimeSchedule::junction(n);
            assert!(t > prev && t < 1.0);
            assert!((TimeSchedule::junction(n + 1) - t - TimeSchedule::interval(n)).abs() < 1e-15);
            prev = t;
        }
        // Delta t_n ~ n^-3.
        let ns: Vec<f64> = (10..=20).map(|n| n as f64).collect();
        let dt: Vec<f64> = (10..=20).map(TimeSchedule::interval).collect();
        assert!((loglog_slope(&ns, &dt) + 3.0).abs() < 0.3);
    }

    #[test]
    fn viscosity_schedule_identity() {
        for m in 1..=4 {
            let s = TimeSchedule::new(m).unwrap();
            assert!((s.viscosity() * 25f64.powi(m as i32) - (m as f64).powi(10)).abs() <= 1e-9 * (m as f64).powi(10));
        }
        assert!((TimeSchedule::new(1).unwrap().viscosity() - 0.04).abs() < 1e-15);
        assert!(TimeSchedule::new(0).is_err() && TimeSchedule::new(5).is_err());
    }

    #[test]
    fn locate_finds_the_interval() {
        for n in 0..12 {
            let t = TimeSchedule::junction(n);
            assert_eq!(TimeSchedule::locate(t), (n, 0.0));
            let (k, x) = TimeSchedule::locate(t + 0.5 * TimeSchedule::interval(n));
            assert_eq!(k, n);
            assert!((x - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn eta_is_flat_at_junctions() {
        let e = Reparametrisation;
        for n in 0..=10 {
            let t = TimeSchedule::junction(n);
            assert_eq!(e.eta(t), t);
            assert!(e.eta_prime(t).abs() <= 1e-10);
            assert!(e.eta_second(t).abs() <= 1e-10);
        }
    }

    #[test]
    fn eta_is_monotone() {
        let e = Reparametrisation;
        let mut prev = 0.0;
        for i in 0..=20000 {
            let v = e.eta(i as f64 / 20000.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn eta_prime_grows_at_most_polynomially() {
        let e = Reparametrisation;
        let ns: Vec<f64> = (1..=15).map(|n| n as f64).collect();
        let sups: Vec<f64> = (1..=15).map(|n| e.sup_prime(n, 400)).collect();
        assert!(loglog_slope(&ns, &sups) <= 5.0);
    }
}
