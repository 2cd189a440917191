//! CSV and JSON file formats.
//!
//! | artifact      | CSV header              | sidecar                  |
//! |---------------|-------------------------|--------------------------|
//! | spike train   | `window,bin`            | [`SpikeTrainMeta`]       |
//! | error report  | `u_in,eps_u,eps_ts`     | caller-defined summary   |
//! | spectrum      | `bin,freq_hz,re,im,mag` |                          |
//! | signal dump   | `t,volts`               |                          |
//!
//! Silent windows leave the `bin` field empty.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::{EncodeOptions, SpikeTrain};
use crate::codec::EncoderConfig;
use crate::error::{input_err, Result};
use crate::error_model::ErrorReport;
use crate::signals::AnalogSignal;
use crate::sft::Spectrum;

/// JSON sidecar written next to a spike-train CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrainMeta {
    pub config: EncoderConfig,
    pub options: EncodeOptions,
    pub windows: usize,
    pub seed: Option<u64>,
}

impl SpikeTrainMeta {
    pub fn of(train: &SpikeTrain) -> Self {
        Self {
            config: train.config,
            options: train.options,
            windows: train.len(),
            seed: train.options.noise.map(|n| n.seed),
        }
    }
}

pub fn write_spike_train_csv<W: Write>(train: &SpikeTrain, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["window", "bin"])?;
    for (m, bin) in train.bins.iter().enumerate() {
        let bin = bin.map(|k| k.to_string()).unwrap_or_default();
        w.write_record([m.to_string(), bin])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the `window,bin` table. Windows must be listed in order from 0.
pub fn read_spike_bins_csv<R: Read>(input: R) -> Result<Vec<Option<u32>>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["window", "bin"] {
        return Err(input_err(format!("expected header window,bin (got {headers:?})")));
    }
    let mut bins = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let m: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| input_err(format!("row {i}: bad window index {:?}", &record[0])))?;
        if m != i {
            return Err(input_err(format!("row {i}: expected window {i}, found {m}")));
        }
        let field = record[1].trim();
        let bin = if field.is_empty() {
            None
        } else {
            Some(
                field
                    .parse()
                    .map_err(|_| input_err(format!("row {i}: bad bin {field:?}")))?,
            )
        };
        bins.push(bin);
    }
    Ok(bins)
}

/// Rebuilds a spike train from its CSV and sidecar.
pub fn read_spike_train<R1: Read, R2: Read>(csv_in: R1, meta_in: R2) -> Result<SpikeTrain> {
    let meta: SpikeTrainMeta = serde_json::from_reader(meta_in)?;
    meta.config.validate()?;
    let bins = read_spike_bins_csv(csv_in)?;
    if bins.len() != meta.windows {
        return Err(input_err(format!(
            "sidecar lists {} windows, CSV has {}",
            meta.windows,
            bins.len()
        )));
    }
    SpikeTrain::new(meta.config, bins, meta.options)
}

pub fn write_error_report_csv<W: Write>(report: &ErrorReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u_in", "eps_u", "eps_ts"])?;
    for s in &report.samples {
        w.write_record([s.u_in.to_string(), s.eps_u.to_string(), s.eps_ts.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum_csv<W: Write>(spectrum: &Spectrum, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin", "freq_hz", "re", "im", "mag"])?;
    for (k, c) in spectrum.coefficients.iter().enumerate() {
        w.write_record([
            k.to_string(),
            spectrum.bin_frequency(k).to_string(),
            c.re.to_string(),
            c.im.to_string(),
            c.norm().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Dumps `count` samples of `sig` spaced `dt` apart.
pub fn write_signal_csv<W: Write>(sig: &AnalogSignal, dt: f64, count: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "volts"])?;
    for i in 0..count {
        let t = i as f64 * dt;
        w.write_record([t.to_string(), sig.value_at(t).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| input_err(format!("{} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::encode_signal;
    use crate::signals::{sine, SineSpec};

    fn train() -> SpikeTrain {
        let cfg = EncoderConfig::with_resolution(0.3e-3, 0.5, 1.0, 5.0, 1.0 / 3000.0, 100).unwrap();
        // dips to 0.2 V, below threshold
        let sig = sine(SineSpec::new(2.8, 500.0, 3.0).unwrap(), 12.0 / 3000.0).unwrap();
        encode_signal(&sig, &cfg, None).unwrap()
    }

    #[test]
    fn spike_train_csv_layout() {
        let t = train();
        let mut buf = Vec::new();
        write_spike_train_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("window,bin"));
        assert_eq!(lines.count(), 12);
        assert!(text.lines().any(|l| l.ends_with(',')), "expected a silent window:\n{text}");
    }

    #[test]
    fn spike_train_reads_back() {
        let t = train();
        let mut csv_buf = Vec::new();
        write_spike_train_csv(&t, &mut csv_buf).unwrap();
        let meta = serde_json::to_vec(&SpikeTrainMeta::of(&t)).unwrap();
        let back = read_spike_train(csv_buf.as_slice(), meta.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn malformed_csv_rejected() {
        assert!(read_spike_bins_csv("window,k\n0,1\n".as_bytes()).is_err());
        assert!(read_spike_bins_csv("window,bin\n1,3\n".as_bytes()).is_err());
        assert!(read_spike_bins_csv("window,bin\n0,x\n".as_bytes()).is_err());
        assert_eq!(
            read_spike_bins_csv("window,bin\n0,4\n1,\n".as_bytes()).unwrap(),
            vec![Some(4), None]
        );
    }

    #[test]
    fn spectrum_csv_header() {
        let s = Spectrum::new(vec![num_complex::Complex64::new(3.0, 4.0); 4], 0.25);
        let mut buf = Vec::new();
        write_spectrum_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("bin,freq_hz,re,im,mag"));
        assert_eq!(text.lines().nth(2), Some("1,1,3,4,5"));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"a").unwrap();
        write_atomic(&p, b"b").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"b");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
