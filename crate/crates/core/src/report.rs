//! Per-shot run records and their CSV serialization.
//!
//! One record per shot, one CSV row per record, fixed header, floats with 17
//! significant digits. The bitstring is hex-encoded with qubit `i` stored in
//! bit `i % 8` of byte `i / 8`, so qubit 0 is the least significant bit of
//! the first byte.

use crate::Error;
use std::fmt::Write as _;
use std::io::Write;

/// Sizes and ranks of the independent regions one shot decomposed into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentStat {
    pub size: usize,
    pub rank: usize,
}

/// What one shot did, minus bookkeeping known only to the run driver.
#[derive(Debug, Clone, Default)]
pub struct ShotStats {
    pub depolarized: usize,
    pub components: Vec<ComponentStat>,
    pub aborted: bool,
}

impl ShotStats {
    pub fn max_component(&self) -> usize {
        self.components.iter().map(|c| c.size).max().unwrap_or(0)
    }

    pub fn max_rank(&self) -> usize {
        self.components.iter().map(|c| c.rank).max().unwrap_or(0)
    }
}

/// One CSV row: a shot's outcome and its diagnostic counters.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotRecord {
    pub seed: u64,
    pub shot: u64,
    pub depolarized: usize,
    pub components: usize,
    pub max_component: usize,
    pub max_rank: usize,
    pub aborted: bool,
    pub wall_micros: u64,
    pub bits: Vec<bool>,
}

impl ShotRecord {
    pub fn new(seed: u64, shot: u64, stats: &ShotStats, wall_micros: u64, bits: Vec<bool>) -> Self {
        ShotRecord {
            seed,
            shot,
            depolarized: stats.depolarized,
            components: stats.components.len(),
            max_component: stats.max_component(),
            max_rank: stats.max_rank(),
            aborted: stats.aborted,
            wall_micros,
            bits,
        }
    }

    /// Hex encoding of the output bits, low qubit in the low bit of the
    /// leading byte pair.
    pub fn bitstring_hex(&self) -> String {
        let mut out = String::with_capacity(self.bits.len().div_ceil(8) * 2);
        for chunk in self.bits.chunks(8) {
            let mut byte = 0u8;
            for (k, &b) in chunk.iter().enumerate() {
                if b {
                    byte |= 1 << k;
                }
            }
            let _ = write!(out, "{byte:02x}");
        }
        out
    }

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}\n",
            self.seed,
            self.shot,
            self.depolarized,
            self.components,
            self.max_component,
            self.max_rank,
            self.aborted,
            self.wall_micros,
            self.bitstring_hex()
        )
    }
}

pub const REPORT_HEADER: &str =
    "seed,shot,depolarized,components,max_component,max_rank,aborted,wall_micros,bitstring\n";

/// Formats a float with 17 significant digits, enough to round-trip f64.
pub fn csv_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the per-shot CSV: fixed header, one row per record.
pub fn write_report_csv<W: Write>(mut w: W, records: &[ShotRecord]) -> Result<(), Error> {
    let io = |e: std::io::Error| Error::invalid(format!("report write failed: {e}"));
    w.write_all(REPORT_HEADER.as_bytes()).map_err(io)?;
    for r in records {
        w.write_all(r.csv_row().as_bytes()).map_err(io)?;
    }
    Ok(())
}

pub const SUMMARY_HEADER: &str =
    "shots,aborts,abort_rate,mean_depolarized,mean_components,mean_max_component,max_rank,total_wall_micros\n";

/// One-row summary of a run. The abort rate doubles as the total-variation
/// budget the uniform fallback spends.
pub fn write_summary_csv<W: Write>(mut w: W, records: &[ShotRecord]) -> Result<(), Error> {
    let io = |e: std::io::Error| Error::invalid(format!("summary write failed: {e}"));
    let shots = records.len();
    let aborts = records.iter().filter(|r| r.aborted).count();
    let mean = |f: &dyn Fn(&ShotRecord) -> f64| {
        if shots == 0 {
            0.0
        } else {
            records.iter().map(|r| f(r)).sum::<f64>() / shots as f64
        }
    };
    let abort_rate = if shots == 0 { 0.0 } else { aborts as f64 / shots as f64 };
    let row = format!(
        "{},{},{},{},{},{},{},{}\n",
        shots,
        aborts,
        csv_f64(abort_rate),
        csv_f64(mean(&|r| r.depolarized as f64)),
        csv_f64(mean(&|r| r.components as f64)),
        csv_f64(mean(&|r| r.max_component as f64)),
        records.iter().map(|r| r.max_rank).max().unwrap_or(0),
        records.iter().map(|r| r.wall_micros).sum::<u64>(),
    );
    w.write_all(SUMMARY_HEADER.as_bytes()).map_err(io)?;
    w.write_all(row.as_bytes()).map_err(io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(bits: Vec<bool>) -> ShotRecord {
        let stats = ShotStats {
            depolarized: 3,
            components: vec![ComponentStat { size: 2, rank: 1 }, ComponentStat { size: 5, rank: 4 }],
            aborted: false,
        };
        ShotRecord::new(9, 0, &stats, 0, bits)
    }

    #[test]
    fn stats_aggregate_componentwise() {
        let r = record(vec![true; 4]);
        assert_eq!(r.components, 2);
        assert_eq!(r.max_component, 5);
        assert_eq!(r.max_rank, 4);
    }

    #[test]
    fn hex_encoding_puts_low_qubits_in_low_bits() {
        // Qubit 0 set -> first byte 0x01.
        assert_eq!(record(vec![true, false, false]).bitstring_hex(), "01");
        // Qubits 0 and 3 set -> 0x09.
        assert_eq!(record(vec![true, false, false, true]).bitstring_hex(), "09");
        // Nine qubits: second byte holds qubit 8.
        let mut bits = vec![false; 9];
        bits[8] = true;
        assert_eq!(record(bits).bitstring_hex(), "0001");
        assert_eq!(record(vec![]).bitstring_hex(), "");
    }

    #[test]
    fn csv_layout_is_stable() {
        let mut buf = Vec::new();
        write_report_csv(&mut buf, &[record(vec![true, true, false, false])]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "seed,shot,depolarized,components,max_component,max_rank,aborted,wall_micros,bitstring\n\
             9,0,3,2,5,4,false,0,03\n"
        );
    }

    #[test]
    fn summary_counts_aborts() {
        let mut a = record(vec![true]);
        a.aborted = true;
        let b = record(vec![false]);
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &[a, b]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SUMMARY_HEADER.trim_end());
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "2");
        assert_eq!(row[1], "1");
        assert_eq!(row[2], csv_f64(0.5));
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0 / 3.0, 0.853553390593273762, 1e-17, 12345.678] {
            let s = csv_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
