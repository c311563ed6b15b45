//! True impulse responses used as the unknown system.
//!
//! Channel text format: a header line `L=<taps>` followed by exactly `L`
//! lines, each holding one tap in decimal scientific notation with 17
//! significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Sparse,
    Dispersive,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Sparse => "sparse",
            ChannelKind::Dispersive => "dispersive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    taps: Vec<f64>,
    kind: ChannelKind,
    seed: u64,
    active_count: Option<usize>,
}

impl Channel {
    /// Wraps explicit taps. The kind is inferred: any zero tap makes it sparse.
    pub fn from_taps(taps: Vec<f64>) -> Result<Self> {
        if taps.len() < 2 {
            return Err(Error::invalid(format!(
                "channel needs at least 2 taps, got {}",
                taps.len()
            )));
        }
        if let Some(i) = taps.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("channel tap {i} is not finite")));
        }
        let nonzero = taps.iter().filter(|&&v| v != 0.0).count();
        if nonzero == 0 {
            return Err(Error::invalid("channel has no nonzero tap"));
        }
        let (kind, active_count) = if nonzero < taps.len() {
            (ChannelKind::Sparse, Some(nonzero))
        } else {
            (ChannelKind::Dispersive, None)
        };
        Ok(Channel {
            taps,
            kind,
            seed: 0,
            active_count,
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn active_count(&self) -> Option<usize> {
        self.active_count
    }
}

/// A channel with `active_count` standard-normal taps at distinct,
/// uniformly chosen positions; every other tap is zero.
pub fn generate_sparse(len: usize, active_count: usize, seed: u64) -> Result<Channel> {
    if len < 2 {
        return Err(Error::invalid(format!(
            "channel length must be > 1, got {len}"
        )));
    }
    if active_count == 0 || active_count > len {
        return Err(Error::invalid(format!(
            "active_count must be in [1, {len}], got {active_count}"
        )));
    }
    let mut pos_rng = stream_rng(seed, Stream::SparsePositions);
    let mut amp_rng = stream_rng(seed, Stream::SparseAmplitudes);
    let mut positions = index::sample(&mut pos_rng, len, active_count).into_vec();
    positions.sort_unstable();

    let mut taps = vec![0.0; len];
    for p in positions {
        // an exact zero draw would break the active-count invariant
        let amp = loop {
            let a: f64 = amp_rng.sample(StandardNormal);
            if a != 0.0 {
                break a;
            }
        };
        taps[p] = amp;
    }
    Ok(Channel {
        taps,
        kind: ChannelKind::Sparse,
        seed,
        active_count: Some(active_count),
    })
}

/// A channel with i.i.d. standard-normal taps under an `exp(-decay·i/L)`
/// envelope.
pub fn generate_dispersive(len: usize, seed: u64, decay: f64) -> Result<Channel> {
    if len < 2 {
        return Err(Error::invalid(format!(
            "channel length must be > 1, got {len}"
        )));
    }
    if !decay.is_finite() || decay < 0.0 {
        return Err(Error::invalid(format!(
            "decay must be finite and >= 0, got {decay}"
        )));
    }
    let mut rng = stream_rng(seed, Stream::DispersiveTaps);
    let l = len as f64;
    let taps = (0..len)
        .map(|i| {
            let g: f64 = rng.sample(StandardNormal);
            g * (-decay * i as f64 / l).exp()
        })
        .collect();
    Ok(Channel {
        taps,
        kind: ChannelKind::Dispersive,
        seed,
        active_count: None,
    })
}

pub fn channel_to_string(ch: &Channel) -> String {
    let mut out = String::with_capacity(ch.len() * 26 + 8);
    let _ = writeln!(out, "L={}", ch.len());
    for t in ch.taps() {
        let _ = writeln!(out, "{t:.16e}");
    }
    out
}

pub fn parse_channel(text: &str, source_name: &str) -> Result<Channel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(source_name, 1, "empty channel file"))?;
    let len: usize = header
        .strip_prefix("L=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| {
            Error::parse(
                source_name,
                hline,
                format!("expected `L=<int>` header, got `{header}`"),
            )
        })?;

    let mut taps = Vec::with_capacity(len);
    let mut last_line = hline;
    for (lineno, line) in lines {
        last_line = lineno;
        if line.is_empty() {
            continue;
        }
        if taps.len() == len {
            return Err(Error::parse(
                source_name,
                lineno,
                format!("more than the declared {len} taps"),
            ));
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::parse(source_name, lineno, format!("not a number: `{line}`")))?;
        taps.push(v);
    }
    if taps.len() != len {
        return Err(Error::parse(
            source_name,
            last_line,
            format!("header declares {len} taps but file has {}", taps.len()),
        ));
    }
    Channel::from_taps(taps).map_err(|e| Error::parse(source_name, hline, e.to_string()))
}

pub fn save_channel(ch: &Channel, path: &Path) -> Result<()> {
    fs::write(path, channel_to_string(ch)).map_err(|e| Error::io(path, e))
}

pub fn load_channel(path: &Path) -> Result<Channel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_channel(&text, &path.display().to_string())
}
