//! Experiment configuration: `key = value` files merged with command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use dyadrep_core::kernel::{Kernel, Modulus};
use dyadrep_core::rep::Gamma;
use dyadrep_core::{SimpleFunction, WeakForm};
use sha2::{Digest, Sha256};

use crate::presets::{preset, Slot};

/// Keys accepted in config files and as `--key` flags.
pub const KEYS: [&str; 20] = [
    "kernel", "f", "g", "a", "b", "k-max", "samples", "seed", "p", "threads", "out", "d", "k", "gamma", "omega", "s", "tol", "theta",
    "normalization", "fast-t1",
];

/// Keys that never change results and stay out of the provenance hash.
const NOT_HASHED: [&str; 2] = ["threads", "out"];

/// Raw `key → value` settings, later ones overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(pub BTreeMap<String, String>);

impl Settings {
    pub fn parse_file_text(text: &str) -> anyhow::Result<Settings> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
            let key = normalize_key(k.trim());
            if !KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key {:?}", n + 1, k.trim());
            }
            map.insert(key, v.trim().to_string());
        }
        Ok(Settings(map))
    }

    pub fn read_file(path: &Path) -> anyhow::Result<Settings> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Settings::parse_file_text(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(normalize_key(key), value.into());
    }

    pub fn merge(mut self, other: &Settings) -> Settings {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
        self
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

fn normalize_key(k: &str) -> String {
    k.trim_start_matches("--").replace('_', "-").to_ascii_lowercase()
}

/// A function argument: a preset, `random`, or exact JSON (inline or a file path).
#[derive(Debug, Clone)]
pub enum FunctionSpec {
    Fixed(SimpleFunction),
    Random,
}

/// How θ is chosen for single-system commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaMode {
    Random,
    Zero,
    /// `θ_0 = e_1`, zero at all coarser scales, random finer scales.
    Separating,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kernel_name: String,
    pub kernel: Kernel,
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    pub a: i32,
    pub b: i32,
    pub k_max: i32,
    pub samples: Option<usize>,
    pub seed: u64,
    pub p: f64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub d: Vec<usize>,
    pub k: Option<Vec<i32>>,
    pub gamma: Vec<Gamma>,
    pub omega: Modulus,
    pub s: Vec<f64>,
    pub tol: Option<f64>,
    pub theta: Option<ThetaMode>,
    pub averaged_normalization: bool,
    pub fast_t1: bool,
    /// Canonical `key=value` lines of the effective settings.
    pub canonical: String,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> anyhow::Result<Vec<T>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<T>().map_err(|_| anyhow!("bad {what} {:?}", x.trim())))
        .collect()
}

pub fn parse_kernel(s: &str) -> anyhow::Result<Kernel> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    match parts.as_slice() {
        ["hilbert"] => Ok(Kernel::hilbert()),
        ["power", d, delta] => {
            let d: usize = d.parse().map_err(|_| anyhow!("bad kernel dimension in {s:?}"))?;
            let delta: f64 = delta.parse().map_err(|_| anyhow!("bad kernel exponent in {s:?}"))?;
            Ok(Kernel::power(d, delta)?)
        }
        _ => bail!("unknown kernel {s:?}; expected hilbert or power:<d>:<delta>"),
    }
}

fn parse_function(s: &str, slot: Slot, d: usize) -> anyhow::Result<FunctionSpec> {
    let s = s.trim();
    if s == "random" {
        return Ok(FunctionSpec::Random);
    }
    if s == "zero" {
        return Ok(FunctionSpec::Fixed(SimpleFunction::zero(d)));
    }
    if let Some(f) = preset(s, slot) {
        return Ok(FunctionSpec::Fixed(f));
    }
    let text = if s.starts_with('{') { s.to_string() } else { std::fs::read_to_string(s).with_context(|| format!("{s:?} is neither a preset nor a readable JSON file"))? };
    Ok(FunctionSpec::Fixed(crate::json::read_str(&text)?))
}

fn parse_bool(s: &str) -> anyhow::Result<bool> {
    match s.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => bail!("bad boolean {s:?}"),
    }
}

impl ExperimentConfig {
    pub fn from_settings(st: &Settings) -> anyhow::Result<ExperimentConfig> {
        for k in st.0.keys() {
            if !KEYS.contains(&k.as_str()) {
                bail!("unknown key {k:?}");
            }
        }
        let kernel_name = st.get("kernel").unwrap_or("hilbert").to_string();
        let kernel = parse_kernel(&kernel_name)?;
        let dim = kernel.dim();
        let default_f = if dim == 2 { "d2-power" } else { "hilbert-standard" };
        let f = parse_function(st.get("f").unwrap_or(default_f), Slot::F, dim)?;
        let g = parse_function(st.get("g").unwrap_or(default_f), Slot::G, dim)?;
        for x in [&f, &g] {
            if let FunctionSpec::Fixed(h) = x {
                if h.dim() != dim {
                    bail!("input has dimension {} but the kernel has dimension {dim}", h.dim());
                }
            }
        }
        let int = |key: &str, default: i32| -> anyhow::Result<i32> {
            st.get(key).map_or(Ok(default), |v| v.trim().parse().map_err(|_| anyhow!("bad {key} {v:?}")))
        };
        let a = int("a", -4)?;
        let b = int("b", 8)?;
        let k_max = int("k-max", 10)?;
        if a >= b {
            bail!("need a < b, got a = {a}, b = {b}");
        }
        if k_max < 2 {
            bail!("k-max must be at least 2");
        }
        let samples = st.get("samples").map(|v| v.trim().parse::<usize>().map_err(|_| anyhow!("bad samples {v:?}"))).transpose()?;
        let seed = st.get("seed").map_or(Ok(1), |v| v.trim().parse::<u64>().map_err(|_| anyhow!("bad seed {v:?}")))?;
        let p = st.get("p").map_or(Ok(2.0), |v| v.trim().parse::<f64>().map_err(|_| anyhow!("bad p {v:?}")))?;
        if !(p > 1.0 && p.is_finite()) {
            bail!("p must lie in (1, ∞)");
        }
        let threads = st.get("threads").map(|v| v.trim().parse::<usize>().map_err(|_| anyhow!("bad threads {v:?}"))).transpose()?;
        let out = PathBuf::from(st.get("out").unwrap_or("out"));
        let d = parse_list::<usize>(st.get("d").unwrap_or("1"), "dimension")?;
        if d.is_empty() || d.iter().any(|&x| x == 0 || x > 8) {
            bail!("dimensions must lie in 1..=8");
        }
        let k = st.get("k").map(|v| parse_list::<i32>(v, "k")).transpose()?;
        if let Some(ks) = &k {
            if ks.iter().any(|&x| !(2..=60).contains(&x)) {
                bail!("every k must lie in 2..=60");
            }
        }
        let gamma = match st.get("gamma") {
            None | Some("all") => Gamma::ALL.to_vec(),
            Some(v) => v.split([',', ';', ' ']).filter(|x| !x.is_empty()).map(Gamma::parse).collect::<Result<Vec<_>, _>>()?,
        };
        let omega = Modulus::parse(st.get("omega").unwrap_or("power:1"))?;
        let s = parse_list::<f64>(st.get("s").unwrap_or("0,1"), "s")?;
        let tol = st.get("tol").map(|v| v.trim().parse::<f64>().map_err(|_| anyhow!("bad tol {v:?}"))).transpose()?;
        let theta = match st.get("theta") {
            None => None,
            Some("random") => Some(ThetaMode::Random),
            Some("zero") => Some(ThetaMode::Zero),
            Some("separating") => Some(ThetaMode::Separating),
            Some(v) => bail!("bad theta {v:?}; expected random, zero or separating"),
        };
        let averaged_normalization = match st.get("normalization").unwrap_or("averaged") {
            "averaged" => true,
            "plain" => false,
            v => bail!("bad normalization {v:?}; expected averaged or plain"),
        };
        let fast_t1 = st.get("fast-t1").map_or(Ok(true), parse_bool)?;
        let canonical = st.0.iter().filter(|(k, _)| !NOT_HASHED.contains(&k.as_str())).map(|(k, v)| format!("{k}={v}\n")).collect();
        Ok(ExperimentConfig {
            kernel_name,
            kernel,
            f,
            g,
            a,
            b,
            k_max,
            samples,
            seed,
            p,
            threads,
            out,
            d,
            k,
            gamma,
            omega,
            s,
            tol,
            theta,
            averaged_normalization,
            fast_t1,
            canonical,
        })
    }

    pub fn form(&self) -> WeakForm {
        WeakForm::new(self.kernel.clone()).with_fast_t1(self.fast_t1)
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    /// SHA-256 of the command name and canonical settings, hex.
    pub fn hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(b"\n");
        h.update(self.canonical.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
