//! Prescribed inlet flow `Q_in(t)`.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum InletWaveform {
    Constant {
        flow: f64,
    },
    /// `base + amplitude sin(pi tau / T_sys)` for `tau = t mod period < T_sys`,
    /// `base` for the rest of the cycle, with `T_sys = systolic_fraction * period`.
    HalfSine {
        base: f64,
        amplitude: f64,
        period: f64,
        systolic_fraction: f64,
    },
    /// Piecewise-linear through `(t, Q)` samples over one period, wrapping
    /// from the last sample back to the first.
    Sampled {
        period: f64,
        samples: Vec<(f64, f64)>,
    },
}

impl InletWaveform {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::HalfSine { .. } => "half_sine",
            Self::Sampled { .. } => "sampled",
        }
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            Self::Constant { .. } => None,
            Self::HalfSine { period, .. } | Self::Sampled { period, .. } => Some(*period),
        }
    }

    /// Every reason this waveform is unusable.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut positive = |name: &str, x: f64| {
            if !(x > 0.0) || !x.is_finite() {
                out.push(format!("inlet {name} must be > 0, got {x}"));
            }
        };
        match self {
            Self::Constant { flow } => positive("flow", *flow),
            Self::HalfSine {
                base,
                amplitude,
                period,
                systolic_fraction,
            } => {
                positive("base", *base);
                positive("period", *period);
                positive("systolic_fraction", *systolic_fraction);
                if !(*amplitude >= 0.0) || !amplitude.is_finite() {
                    out.push(format!("inlet amplitude must be >= 0, got {amplitude}"));
                }
                if *systolic_fraction > 1.0 {
                    out.push(format!(
                        "inlet systolic_fraction must be <= 1, got {systolic_fraction}"
                    ));
                }
            }
            Self::Sampled { period, samples } => {
                positive("period", *period);
                if samples.len() < 2 {
                    out.push("sampled inlet needs at least two samples".into());
                }
                for (t, q) in samples {
                    if !(*q > 0.0) {
                        out.push(format!("inlet sample at t = {t} must be > 0, got {q}"));
                    }
                    if !(*t >= 0.0 && t < period) {
                        out.push(format!("inlet sample time {t} must lie in [0, period)"));
                    }
                }
                if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    out.push("inlet sample times must be strictly increasing".into());
                }
            }
        }
        out
    }

    /// `Q_in(t)` for `t >= 0`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Constant { flow } => *flow,
            Self::HalfSine {
                base,
                amplitude,
                period,
                systolic_fraction,
            } => {
                let tau = t.rem_euclid(*period);
                let systole = systolic_fraction * period;
                if tau < systole {
                    base + amplitude * (std::f64::consts::PI * tau / systole).sin()
                } else {
                    *base
                }
            }
            Self::Sampled { period, samples } => {
                let tau = t.rem_euclid(*period);
                let n = samples.len();
                let (t_first, q_first) = samples[0];
                let (t_last, q_last) = samples[n - 1];
                let wrap = |s: f64| {
                    let span = t_first + period - t_last;
                    q_last + (q_first - q_last) * s / span
                };
                if tau < t_first {
                    return wrap(tau + period - t_last);
                }
                if tau >= t_last {
                    return wrap(tau - t_last);
                }
                let k = samples.partition_point(|(ts, _)| *ts <= tau) - 1;
                let (t0, q0) = samples[k];
                let (t1, q1) = samples[k + 1];
                q0 + (q1 - q0) * (tau - t0) / (t1 - t0)
            }
        }
    }
}

impl fmt::Display for InletWaveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind = {}", self.kind())?;
        match self {
            Self::Constant { flow } => writeln!(f, "flow = {flow}"),
            Self::HalfSine {
                base,
                amplitude,
                period,
                systolic_fraction,
            } => {
                writeln!(f, "base = {base}")?;
                writeln!(f, "amplitude = {amplitude}")?;
                writeln!(f, "period = {period}")?;
                writeln!(f, "systolic_fraction = {systolic_fraction}")
            }
            Self::Sampled { period, samples } => {
                writeln!(f, "period = {period}")?;
                let list: Vec<String> = samples.iter().map(|(t, q)| format!("{t}:{q}")).collect();
                writeln!(f, "samples = {}", list.join(", "))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn constant() {
        let w = InletWaveform::Constant { flow: 2.5 };
        for t in [0.0, 1.0, 123.4] {
            assert_eq!(w.eval(t), 2.5);
        }
    }

    #[test]
    fn half_sine_shape() {
        let w = InletWaveform::HalfSine {
            base: 1.0,
            amplitude: 3.0,
            period: 0.8,
            systolic_fraction: 0.375,
        };
        assert_eq!(w.eval(0.0), 1.0);
        let t_sys = 0.375 * 0.8;
        assert!((w.eval(t_sys / 2.0) - 4.0).abs() < 1e-15);
        assert_eq!(w.eval(0.5), 1.0);
        assert!(w.violations().is_empty());
    }

    #[test]
    fn periodic_kinds_repeat() {
        let waves = [
            InletWaveform::HalfSine {
                base: 1.0,
                amplitude: 3.0,
                period: 0.8,
                systolic_fraction: 0.4,
            },
            InletWaveform::Sampled {
                period: 1.0,
                samples: vec![(0.1, 1.0), (0.3, 4.0), (0.6, 2.0), (0.9, 1.5)],
            },
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for w in &waves {
            let period = w.period().unwrap();
            for _ in 0..100 {
                let t: f64 = rng.gen_range(0.0..10.0);
                assert!((w.eval(t + period) - w.eval(t)).abs() <= 1e-12);
                assert!(w.eval(t) > 0.0);
            }
        }
    }

    #[test]
    fn sampled_interpolation() {
        let w = InletWaveform::Sampled {
            period: 1.0,
            samples: vec![(0.0, 1.0), (0.5, 3.0)],
        };
        assert_eq!(w.eval(0.0), 1.0);
        assert!((w.eval(0.25) - 2.0).abs() < 1e-15);
        assert_eq!(w.eval(0.5), 3.0);
        // wraps from 3.0 at 0.5 back to 1.0 at 1.0
        assert!((w.eval(0.75) - 2.0).abs() < 1e-15);
        // samples not starting at zero
        let w = InletWaveform::Sampled {
            period: 1.0,
            samples: vec![(0.2, 1.0), (0.6, 2.0)],
        };
        assert!((w.eval(0.0) - 4.0 / 3.0).abs() < 1e-14);
        assert!((w.eval(0.4) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive() {
        assert_eq!(InletWaveform::Constant { flow: 0.0 }.violations().len(), 1);
        let w = InletWaveform::Sampled {
            period: 1.0,
            samples: vec![(0.0, 1.0), (0.0, -2.0), (1.5, 1.0)],
        };
        assert_eq!(w.violations().len(), 3);
    }
}
