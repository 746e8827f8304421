//! Sweep configuration: a flat `key = value` file, lists comma separated.
//!
//! ```text
//! # Table III grid
//! endmembers = 6
//! pixels = 10000
//! purity = 0.8, 0.9, 1
//! snr_db = 20, 25, 30, 35, 40
//! trials = 20
//! master_seed = 1000
//! ```
//!
//! `snr_db` accepts `inf` for noiseless data.

use std::collections::BTreeSet;
use std::str::FromStr;

use hypercsi::estimator::DEFAULT_ETA;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub bands: usize,
    pub endmembers: Vec<usize>,
    pub pixels: Vec<usize>,
    /// `None` is noiseless.
    pub snr_db: Vec<Option<f64>>,
    pub purity: Vec<f64>,
    pub eta: Vec<f64>,
    pub no_shift: bool,
    pub trials: usize,
    pub master_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            bands: 224,
            endmembers: Vec::new(),
            pixels: Vec::new(),
            snr_db: vec![None],
            purity: vec![1.0],
            eta: vec![DEFAULT_ETA],
            no_shift: false,
            trials: 1,
            master_seed: 0,
        }
    }
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, String> {
    let items = value
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| format!("{key}: cannot parse {:?}", s.trim())))
        .collect::<Result<Vec<T>, String>>()?;
    if items.is_empty() {
        return Err(format!("{key}: empty list"));
    }
    Ok(items)
}

fn single<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("{key}: cannot parse {value:?}"))
}

fn snr(value: &str) -> Result<Option<f64>, String> {
    let v = value.trim();
    if v.eq_ignore_ascii_case("inf") {
        return Ok(None);
    }
    match v.parse::<f64>() {
        Ok(x) if x.is_infinite() && x > 0.0 => Ok(None),
        Ok(x) if x.is_finite() => Ok(Some(x)),
        _ => Err(format!("snr_db: cannot parse {v:?}")),
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = SweepConfig::default();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(format!("line {}: duplicate key {key}", lineno + 1));
            }
            match key {
                "bands" => cfg.bands = single(key, value)?,
                "endmembers" => cfg.endmembers = list(key, value)?,
                "pixels" => cfg.pixels = list(key, value)?,
                "snr_db" => cfg.snr_db = value.split(',').map(snr).collect::<Result<_, _>>()?,
                "purity" => cfg.purity = list(key, value)?,
                "eta" => cfg.eta = list(key, value)?,
                "no_shift" => cfg.no_shift = single(key, value)?,
                "trials" => cfg.trials = single(key, value)?,
                "master_seed" => cfg.master_seed = single(key, value)?,
                other => return Err(format!("line {}: unknown key {other}", lineno + 1)),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.endmembers.is_empty() || self.pixels.is_empty() {
            return Err("endmembers and pixels are required".into());
        }
        if let Some(n) = self.endmembers.iter().find(|&&n| n < 2) {
            return Err(format!("endmembers: {n} is below 2"));
        }
        if let Some(&n) = self.endmembers.iter().find(|&&n| n > self.bands) {
            return Err(format!("endmembers: {n} exceeds bands = {}", self.bands));
        }
        if let Some(e) = self.eta.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
            return Err(format!("eta: {e} outside (0, 1]"));
        }
        for &n in &self.endmembers {
            let lower = hypercsi::synth::purity_lower_bound(n);
            if let Some(r) = self.purity.iter().find(|&&r| !(r > lower && r <= 1.0)) {
                return Err(format!("purity: {r} outside ({lower:.4}, 1] for {n} endmembers"));
            }
        }
        if self.trials == 0 {
            return Err("trials must be positive".into());
        }
        Ok(())
    }

    /// Number of runs in the full cross product.
    pub fn n_runs(&self) -> usize {
        self.endmembers.len() * self.pixels.len() * self.purity.len() * self.snr_db.len() * self.eta.len() * self.trials
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_defaults() {
        let cfg = SweepConfig::parse("endmembers = 4,6\npixels=100 # small\n\nsnr_db = inf, 30\n").unwrap();
        assert_eq!(cfg.endmembers, vec![4, 6]);
        assert_eq!(cfg.pixels, vec![100]);
        assert_eq!(cfg.snr_db, vec![None, Some(30.0)]);
        assert_eq!(cfg.eta, vec![0.9]);
        assert_eq!(cfg.n_runs(), 4);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SweepConfig::parse("pixels = 10").is_err());
        assert!(SweepConfig::parse("endmembers = 4\npixels = 10\ncolour = red").is_err());
        assert!(SweepConfig::parse("endmembers = 4\nendmembers = 5\npixels = 10").is_err());
        assert!(SweepConfig::parse("endmembers = 4\npixels = 10\neta = 0").is_err());
        assert!(SweepConfig::parse("endmembers = 4\npixels = 10\npurity = 0.3").is_err());
        assert!(SweepConfig::parse("endmembers = 4\npixels = x").is_err());
    }
}
