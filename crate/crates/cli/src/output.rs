//! CSV writers and the run manifest.
//!
//! Every CSV starts with a comment line naming the schema version and the
//! table kind, followed by a header row:
//!
//! ```text
//! # micromaser-csv schema_version=1 kind=events
//! t,kind,n_after,phi_used
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use micromaser::experiments::{CurveEntry, InjectionOutcome, OracleComparison, RateSample};
use micromaser::oracle::HysteresisBranches;
use micromaser::{ClickRecord, DetectionEvent, EventRecord};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Table;

pub const SCHEMA_VERSION: u32 = 1;

fn header(kind: &str, columns: &str) -> String {
    format!("# micromaser-csv schema_version={SCHEMA_VERSION} kind={kind}\n{columns}\n")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn events_csv(events: &[EventRecord]) -> String {
    let mut s = header("events", "t,kind,n_after,phi_used");
    for e in events {
        let _ = writeln!(s, "{},{},{},{}", e.t, e.kind, e.n_after, opt(e.phi_used));
    }
    s
}

pub fn clicks_csv(clicks: &[ClickRecord]) -> String {
    let mut s = header("clicks", "t,channel,origin");
    for c in clicks {
        let _ = writeln!(s, "{},{},{}", c.t, c.channel.as_str(), c.origin.as_str());
    }
    s
}

pub fn detections_csv(detections: &[DetectionEvent]) -> String {
    let mut s = header("detections", "t_trigger,t_rearmed,window_count");
    for d in detections {
        let _ = writeln!(s, "{},{},{}", d.t_trigger, d.t_rearmed, d.window_count);
    }
    s
}

pub fn rates_csv(rates: &[RateSample]) -> String {
    let mut s = header("rate_series", "t,n,ground_rate");
    for r in rates {
        let _ = writeln!(s, "{},{},{}", r.t, r.n, r.ground_rate);
    }
    s
}

pub fn injections_csv(outcomes: &[InjectionOutcome]) -> String {
    let mut s = header("injections", "t,armed,detected,latency,triggers");
    for o in outcomes {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            o.t,
            o.armed,
            o.detected(),
            opt(o.latency),
            o.triggers
        );
    }
    s
}

pub fn efficiency_csv(curve: &[CurveEntry]) -> String {
    let mut s = header(
        "efficiency",
        "R,two_atom_mode,seed,injected,detected,efficiency,ci_low,ci_high,mean_latency,false_triggers,dead_time_losses,error",
    );
    for e in curve {
        match &e.result {
            Ok(p) => {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{},{},",
                    e.pump_rate,
                    e.two_atom_mode,
                    e.seed,
                    p.injected,
                    p.detected,
                    p.efficiency,
                    p.ci_low,
                    p.ci_high,
                    p.mean_latency,
                    p.false_triggers,
                    p.dead_time_losses
                );
            }
            Err(msg) => {
                let _ = writeln!(
                    s,
                    "{},{},{},,,,,,,,,\"{}\"",
                    e.pump_rate,
                    e.two_atom_mode,
                    e.seed,
                    msg.replace('"', "'")
                );
            }
        }
    }
    s
}

pub fn branches_csv(branches: &HysteresisBranches) -> String {
    let mut s = header("branches", "R,branch,rate,mean_photons");
    for (name, points) in [("up", &branches.up), ("down", &branches.down)] {
        for p in points.iter() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                p.pump_rate, name, p.output_rate, p.mean_photons
            );
        }
    }
    s
}

pub fn distribution_csv(p: &[f64]) -> String {
    let mut s = header("distribution", "n,probability");
    for (n, v) in p.iter().enumerate() {
        let _ = writeln!(s, "{n},{v}");
    }
    s
}

pub fn oracle_csv(rows: &[OracleComparison]) -> String {
    let mut s = header(
        "oracle_check",
        "set,pump_rate,gamma,phi0,delta_phi,n_thermal,events,total_variation",
    );
    for (i, r) in rows.iter().enumerate() {
        let p = &r.params;
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{},{}",
            p.pump_rate, p.gamma, p.phi0, p.delta_phi, p.n_thermal, r.events, r.total_variation
        );
    }
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Everything needed to rerun a command bit-exactly, plus digests of what it
/// wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// Resolved parameters, for reading; replay uses `config`.
    pub params: micromaser::SimParams,
    pub controller: micromaser::ControllerConfig,
    pub schedule: String,
    /// The configuration table the run was built from.
    pub config: Table,
    /// File name to SHA-256 digest.
    pub files: BTreeMap<String, String>,
}

pub const MANIFEST_NAME: &str = "manifest.toml";

/// Collects output files in memory and writes them in one pass, followed by
/// the manifest.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn digests(&self) -> BTreeMap<String, String> {
        self.files
            .iter()
            .map(|(n, c)| (n.clone(), sha256_hex(c.as_bytes())))
            .collect()
    }

    pub fn write(&self, dir: &Path, manifest: &RunManifest) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        let path = dir.join(MANIFEST_NAME);
        let text = toml::to_string(manifest).context("serializing manifest")?;
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        Ok(written)
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use micromaser::JumpKind;

    #[test]
    fn every_csv_carries_schema_line() {
        let e = events_csv(&[EventRecord::new(0.5, JumpKind::Injection, 1, None)]);
        let mut lines = e.lines();
        assert_eq!(
            lines.next(),
            Some("# micromaser-csv schema_version=1 kind=events")
        );
        assert_eq!(lines.next(), Some("t,kind,n_after,phi_used"));
        assert_eq!(lines.next(), Some("0.5,injection,1,"));
        for text in [
            clicks_csv(&[]),
            detections_csv(&[]),
            rates_csv(&[]),
            distribution_csv(&[1.0]),
        ] {
            assert!(text.starts_with("# micromaser-csv schema_version=1 kind="));
        }
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
