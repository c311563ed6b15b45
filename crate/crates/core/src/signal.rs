//! Far-end input, regressors and the desired (echo + noise) signal.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// `n` i.i.d. `N(0, sigma_x²)` samples.
pub fn generate_input(n: usize, seed: u64, sigma_x: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("input length must be >= 1"));
    }
    if !sigma_x.is_finite() || sigma_x <= 0.0 {
        return Err(Error::invalid(format!(
            "sigma_x must be > 0, got {sigma_x}"
        )));
    }
    let mut rng = stream_rng(seed, Stream::Input);
    Ok((0..n)
        .map(|_| sigma_x * rng.sample::<f64, _>(StandardNormal))
        .collect())
}

/// `[x(n), x(n-1), …, x(n-L+1)]` with zeros before the start of the signal.
pub fn regressor_at(x: &[f64], n: usize, len: usize) -> Result<Vec<f64>> {
    if n >= x.len() {
        return Err(Error::invalid(format!(
            "regressor index {n} out of range for signal of length {}",
            x.len()
        )));
    }
    Ok((0..len)
        .map(|i| if i <= n { x[n - i] } else { 0.0 })
        .collect())
}

/// All regressors of a signal as zero-copy slices.
///
/// Stores the zero-padded signal reversed, so regressor `n` is the contiguous
/// window `rev[N-1-n .. N-1-n+L]`.
#[derive(Debug, Clone)]
pub struct Regressors {
    rev: Vec<f64>,
    signal_len: usize,
    len: usize,
}

impl Regressors {
    pub fn new(x: &[f64], len: usize) -> Self {
        let mut rev = Vec::with_capacity(x.len() + len.saturating_sub(1));
        rev.extend(x.iter().rev());
        rev.extend(std::iter::repeat_n(0.0, len.saturating_sub(1)));
        Regressors {
            rev,
            signal_len: x.len(),
            len,
        }
    }

    pub fn at(&self, n: usize) -> &[f64] {
        let start = self.signal_len - 1 - n;
        &self.rev[start..start + self.len]
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }
}

/// Piecewise-constant true system: each channel is active from its start index
/// until the next segment begins.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSchedule {
    segments: Vec<(usize, Channel)>,
}

impl ChannelSchedule {
    pub fn new(segments: Vec<(usize, Channel)>) -> Result<Self> {
        let Some((first_start, first)) = segments.first() else {
            return Err(Error::invalid("channel schedule is empty"));
        };
        if *first_start != 0 {
            return Err(Error::invalid(
                "first schedule segment must start at sample 0",
            ));
        }
        let len = first.len();
        for pair in segments.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::invalid(
                    "schedule start indices must be strictly increasing",
                ));
            }
        }
        if segments.iter().any(|(_, ch)| ch.len() != len) {
            return Err(Error::invalid(
                "all scheduled channels must share one length",
            ));
        }
        Ok(ChannelSchedule { segments })
    }

    pub fn single(channel: Channel) -> Self {
        ChannelSchedule {
            segments: vec![(0, channel)],
        }
    }

    pub fn filter_len(&self) -> usize {
        self.segments[0].1.len()
    }

    pub fn segments(&self) -> &[(usize, Channel)] {
        &self.segments
    }

    /// The channel in force at sample `n`.
    pub fn active(&self, n: usize) -> &Channel {
        let idx = self.segments.partition_point(|(start, _)| *start <= n);
        &self.segments[idx - 1].1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesiredSignal {
    pub d: Vec<f64>,
    pub clean: Vec<f64>,
    pub noise_variance: f64,
}

impl DesiredSignal {
    /// `10·log10(mean(clean²) / mean(v²))` of the realized sequences.
    pub fn realized_snr_db(&self) -> f64 {
        let clean_pow = mean_square(&self.clean);
        let noise_pow = self
            .d
            .iter()
            .zip(&self.clean)
            .map(|(d, c)| (d - c) * (d - c))
            .sum::<f64>()
            / self.d.len() as f64;
        10.0 * (clean_pow / noise_pow).log10()
    }
}

fn mean_square(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64
}

/// Passes `x` through the scheduled channels and adds white Gaussian noise
/// whose variance puts the clean-echo power `snr_db` above it.
///
/// `snr_db = +inf` gives a noise-free desired signal.
pub fn synthesize_desired(
    x: &[f64],
    schedule: &ChannelSchedule,
    snr_db: f64,
    noise_seed: u64,
) -> Result<DesiredSignal> {
    if x.is_empty() {
        return Err(Error::invalid("input signal is empty"));
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::invalid(format!("invalid SNR {snr_db}")));
    }
    let regs = Regressors::new(x, schedule.filter_len());
    let clean: Vec<f64> = (0..x.len())
        .map(|n| dot(regs.at(n), schedule.active(n).taps()))
        .collect();

    if snr_db == f64::INFINITY {
        return Ok(DesiredSignal {
            d: clean.clone(),
            clean,
            noise_variance: 0.0,
        });
    }
    let noise_variance = mean_square(&clean) / 10f64.powf(snr_db / 10.0);
    let sigma_v = noise_variance.sqrt();
    let mut rng = stream_rng(noise_seed, Stream::Noise);
    let d = clean
        .iter()
        .map(|c| c + sigma_v * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(DesiredSignal {
        d,
        clean,
        noise_variance,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_dispersive, generate_sparse};

    #[test]
    fn input_statistics_and_determinism() {
        let x = generate_input(10_000, 1, 1.0).unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (x.len() - 1) as f64;
        // 99.9% chi-square interval for n = 10^4 is roughly 1 ± 0.047
        assert!((0.94..=1.06).contains(&var), "variance {var}");
        assert_eq!(x, generate_input(10_000, 1, 1.0).unwrap());
    }

    #[test]
    fn input_scales_with_sigma() {
        let a = generate_input(500, 9, 1.0).unwrap();
        let b = generate_input(500, 9, 2.0).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| 2.0 * p == *q));
    }

    #[test]
    fn input_rejects_empty_and_bad_sigma() {
        assert!(generate_input(0, 1, 1.0).is_err());
        assert!(generate_input(3, 1, 0.0).is_err());
    }

    #[test]
    fn regressor_examples() {
        let x = [5.0, 7.0, 9.0];
        assert_eq!(regressor_at(&x, 0, 3).unwrap(), vec![5.0, 0.0, 0.0]);
        assert_eq!(regressor_at(&x, 2, 3).unwrap(), vec![9.0, 7.0, 5.0]);
        assert_eq!(regressor_at(&x, 2, 2).unwrap(), vec![9.0, 7.0]);
        assert!(regressor_at(&x, 3, 2).is_err());
    }

    #[test]
    fn sliding_regressors_match_definition() {
        let x = generate_input(40, 3, 1.0).unwrap();
        for len in [1usize, 2, 7, 40, 55] {
            let regs = Regressors::new(&x, len);
            for n in 0..x.len() {
                assert_eq!(regs.at(n), regressor_at(&x, n, len).unwrap().as_slice());
            }
        }
    }

    #[test]
    fn schedule_validation() {
        let a = generate_sparse(8, 2, 1).unwrap();
        let b = generate_sparse(8, 2, 2).unwrap();
        let c = generate_sparse(6, 2, 2).unwrap();
        assert!(ChannelSchedule::new(vec![]).is_err());
        assert!(ChannelSchedule::new(vec![(1, a.clone())]).is_err());
        assert!(ChannelSchedule::new(vec![(0, a.clone()), (0, b.clone())]).is_err());
        assert!(ChannelSchedule::new(vec![(0, a.clone()), (5, c)]).is_err());
        let s = ChannelSchedule::new(vec![(0, a.clone()), (5, b.clone())]).unwrap();
        assert_eq!(s.active(0), &a);
        assert_eq!(s.active(4), &a);
        assert_eq!(s.active(5), &b);
        assert_eq!(s.active(1000), &b);
    }

    #[test]
    fn noise_free_desired_is_clean() {
        let x = generate_input(300, 4, 1.0).unwrap();
        let s = ChannelSchedule::single(generate_sparse(16, 3, 5).unwrap());
        let d = synthesize_desired(&x, &s, f64::INFINITY, 11).unwrap();
        assert_eq!(d.d, d.clean);
        assert_eq!(d.noise_variance, 0.0);
    }

    #[test]
    fn unit_impulse_channel_is_identity() {
        let x = generate_input(200, 4, 1.0).unwrap();
        let mut taps = vec![0.0; 10];
        taps[0] = 1.0;
        let s = ChannelSchedule::single(Channel::from_taps(taps).unwrap());
        let d = synthesize_desired(&x, &s, f64::INFINITY, 0).unwrap();
        assert_eq!(d.d, x);
    }

    #[test]
    fn realized_snr_near_target() {
        let x = generate_input(10_000, 8, 1.0).unwrap();
        let s = ChannelSchedule::single(generate_dispersive(64, 2, 0.0).unwrap());
        let d = synthesize_desired(&x, &s, 30.0, 19).unwrap();
        let snr = d.realized_snr_db();
        assert!((29.8..=30.2).contains(&snr), "realized {snr}");
    }

    #[test]
    fn noise_seed_changes_d_not_clean() {
        let x = generate_input(500, 8, 1.0).unwrap();
        let s = ChannelSchedule::single(generate_sparse(32, 4, 2).unwrap());
        let a = synthesize_desired(&x, &s, 20.0, 1).unwrap();
        let b = synthesize_desired(&x, &s, 20.0, 2).unwrap();
        assert_eq!(a.clean, b.clean);
        assert_ne!(a.d, b.d);
        assert_eq!(a, synthesize_desired(&x, &s, 20.0, 1).unwrap());
    }

    #[test]
    fn segments_use_their_own_channel() {
        let x = generate_input(120, 8, 1.0).unwrap();
        let before = generate_sparse(8, 2, 1).unwrap();
        let after = generate_sparse(8, 3, 2).unwrap();
        let s = ChannelSchedule::new(vec![(0, before.clone()), (60, after.clone())]).unwrap();
        let d = synthesize_desired(&x, &s, f64::INFINITY, 0).unwrap();
        for n in 0..x.len() {
            let h = if n < 60 { &before } else { &after };
            let r = regressor_at(&x, n, 8).unwrap();
            assert_eq!(d.clean[n], dot(&r, h.taps()));
        }
    }
}
