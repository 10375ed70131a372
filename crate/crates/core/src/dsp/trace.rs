use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &str = "kcomb-trace v1";
const END_HEADER: &str = "END_HEADER";

/// Default channel labels: the detectors of modes +1, -1, +2, -2.
pub const DEFAULT_LABELS: [&str; 4] = ["+1", "-1", "+2", "-2"];

/// Sampling layout of one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acquisition {
    /// Samples per second.
    pub sample_rate: f64,
    /// Samples per disjoint acquisition.
    pub segment_length: usize,
    pub n_segments: usize,
}

impl Default for Acquisition {
    /// 50 records of 100 us at 5 GS/s.
    fn default() -> Self {
        Self {
            sample_rate: 5e9,
            segment_length: 500_000,
            n_segments: 50,
        }
    }
}

impl Acquisition {
    pub fn total_len(&self) -> usize {
        self.segment_length * self.n_segments
    }

    pub fn bin_hz(&self) -> f64 {
        self.sample_rate / self.segment_length as f64
    }

    pub fn check(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::Trace("sample rate must be positive".into()));
        }
        if self.segment_length < 16 {
            return Err(Error::Trace(format!(
                "segment length {} shorter than 16 samples",
                self.segment_length
            )));
        }
        if self.n_segments == 0 {
            return Err(Error::Trace("need at least one segment".into()));
        }
        Ok(())
    }
}

/// Multi-channel photocurrent record. Samples are stored as `f32`, the
/// precision of the on-disk format.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    pub labels: Vec<String>,
    pub channels: Vec<Vec<f32>>,
    pub acquisition: Acquisition,
    /// Mean photocurrent per channel.
    pub dc_levels: Vec<f64>,
}

impl TraceSet {
    /// Builds a record, taking DC levels as the channel means.
    pub fn new(
        labels: Vec<String>,
        channels: Vec<Vec<f32>>,
        acquisition: Acquisition,
    ) -> Result<Self> {
        let dc_levels = channels.iter().map(|c| mean(c)).collect();
        let t = Self {
            labels,
            channels,
            acquisition,
            dc_levels,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        self.acquisition.check()?;
        if self.channels.is_empty() || self.labels.len() != self.channels.len() {
            return Err(Error::Trace("labels and channels disagree".into()));
        }
        if self.dc_levels.len() != self.channels.len() {
            return Err(Error::Trace("one DC level per channel required".into()));
        }
        let n = self.acquisition.total_len();
        if let Some((i, c)) = self.channels.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::Trace(format!(
                "channel {} has {} samples, expected {n}",
                self.labels[i],
                c.len()
            )));
        }
        Ok(())
    }

    pub fn channel_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Trace(format!("no channel labelled {label}")))
    }

    pub fn segment(&self, channel: usize, s: usize) -> &[f32] {
        let n = self.acquisition.segment_length;
        &self.channels[channel][s * n..(s + 1) * n]
    }

    /// Writes the binary container: a text header closed by `END_HEADER`,
    /// then little-endian `f32` samples channel after channel.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "labels={}", self.labels.join(","))?;
        writeln!(w, "sample_rate={:e}", self.acquisition.sample_rate)?;
        writeln!(w, "segment_length={}", self.acquisition.segment_length)?;
        writeln!(w, "n_segments={}", self.acquisition.n_segments)?;
        let dc: Vec<String> = self.dc_levels.iter().map(|d| format!("{d:e}")).collect();
        writeln!(w, "dc_levels={}", dc.join(","))?;
        writeln!(w, "{END_HEADER}")?;
        for c in &self.channels {
            let mut bytes = Vec::with_capacity(4 * c.len());
            for x in c {
                bytes.extend_from_slice(&x.to_le_bytes());
            }
            w.write_all(&bytes)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut line = String::new();
        r.read_line(&mut line)?;
        if line.trim_end() != MAGIC {
            return Err(Error::Trace(format!(
                "{}: not a trace file",
                path.display()
            )));
        }
        let mut labels = None;
        let mut sample_rate = None;
        let mut segment_length = None;
        let mut n_segments = None;
        let mut dc_levels = None;
        loop {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(Error::Trace("header not terminated".into()));
            }
            let l = line.trim_end();
            if l == END_HEADER {
                break;
            }
            let (key, value) = l
                .split_once('=')
                .ok_or_else(|| Error::Trace(format!("bad header line `{l}`")))?;
            let bad = |_| Error::Trace(format!("bad value for {key}"));
            match key {
                "labels" => labels = Some(value.split(',').map(String::from).collect::<Vec<_>>()),
                "sample_rate" => sample_rate = Some(value.parse::<f64>().map_err(bad)?),
                "segment_length" => {
                    segment_length = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| Error::Trace("bad segment_length".into()))?,
                    )
                }
                "n_segments" => {
                    n_segments = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| Error::Trace("bad n_segments".into()))?,
                    )
                }
                "dc_levels" => {
                    dc_levels = Some(
                        value
                            .split(',')
                            .map(|v| v.parse::<f64>().map_err(bad))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                _ => return Err(Error::Trace(format!("unknown header key `{key}`"))),
            }
        }
        let missing = |k: &str| Error::Trace(format!("header lacks {k}"));
        let labels = labels.ok_or_else(|| missing("labels"))?;
        let acquisition = Acquisition {
            sample_rate: sample_rate.ok_or_else(|| missing("sample_rate"))?,
            segment_length: segment_length.ok_or_else(|| missing("segment_length"))?,
            n_segments: n_segments.ok_or_else(|| missing("n_segments"))?,
        };
        acquisition.check()?;
        let n = acquisition.total_len();
        let mut channels = Vec::with_capacity(labels.len());
        let mut buf = vec![0u8; 4 * n];
        for _ in 0..labels.len() {
            r.read_exact(&mut buf)
                .map_err(|_| Error::Trace("truncated sample data".into()))?;
            channels.push(
                buf.chunks_exact(4)
                    .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                    .collect(),
            );
        }
        let t = Self {
            labels,
            channels,
            acquisition,
            dc_levels: dc_levels.ok_or_else(|| missing("dc_levels"))?,
        };
        t.validate()?;
        Ok(t)
    }

    /// Writes one column per channel with the labels as header row.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(&self.labels).map_err(csv_err)?;
        let mut row = vec![String::new(); self.channels.len()];
        for i in 0..self.acquisition.total_len() {
            for (cell, c) in row.iter_mut().zip(&self.channels) {
                *cell = c[i].to_string();
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Imports a CSV export: header row of labels, one sample row per time
    /// step. Acquisition layout must be supplied; DC levels are channel
    /// means.
    pub fn read_csv(path: &Path, sample_rate: f64, segment_length: usize) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(csv_err)?;
        let labels: Vec<String> = r
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(String::from)
            .collect();
        let mut channels = vec![Vec::new(); labels.len()];
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            for (c, f) in channels.iter_mut().zip(rec.iter()) {
                c.push(
                    f.parse::<f32>()
                        .map_err(|_| Error::Trace(format!("row {}: bad number `{f}`", i + 2)))?,
                );
            }
        }
        if segment_length == 0 {
            return Err(Error::Trace("segment length must be positive".into()));
        }
        let total = channels[0].len();
        if total % segment_length != 0 {
            return Err(Error::Trace(format!(
                "{total} samples is not a whole number of {segment_length}-sample segments"
            )));
        }
        let acquisition = Acquisition {
            sample_rate,
            segment_length,
            n_segments: total / segment_length,
        };
        Self::new(labels, channels, acquisition)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Trace(format!("CSV: {e}"))
}

pub(crate) fn mean(x: &[f32]) -> f64 {
    x.iter().map(|&v| v as f64).sum::<f64>() / x.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TraceSet {
        let acq = Acquisition {
            sample_rate: 1e6,
            segment_length: 16,
            n_segments: 2,
        };
        let ch = (0..2)
            .map(|c| {
                (0..32)
                    .map(|i| (i as f32 * 0.37 + c as f32).sin() + 2.0)
                    .collect()
            })
            .collect();
        TraceSet::new(vec!["+1".into(), "-1".into()], ch, acq).unwrap()
    }

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.kct");
        let t = small();
        t.write(&path).unwrap();
        assert_eq!(TraceSet::read(&path).unwrap(), t);
    }

    #[test]
    fn csv_round_trip_matches_binary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let t = small();
        t.write_csv(&path).unwrap();
        let back = TraceSet::read_csv(&path, 1e6, 16).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_short_segments() {
        let acq = Acquisition {
            sample_rate: 1e6,
            segment_length: 8,
            n_segments: 1,
        };
        assert!(TraceSet::new(vec!["a".into()], vec![vec![0.0; 8]], acq).is_err());
    }
}
