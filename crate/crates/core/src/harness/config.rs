//! Plain-text `key = value` configuration with embedded defaults.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// The defaults, also the documentation of every key. `--print-config` prints this.
pub const DEFAULT_CONFIG: &str = "\
# Curve family of the building blocks: snake or circle.
family = snake
# Number of blocks of the snake family.
blocks = 6
# Seed of every random choice.
seed = 1

# geometry-check
circle_radius = 0.2
offsets = 0.001, 0.01, 0.05
geometry_times = 0, 0.5, 1
constraint_eps = 0.001
tol_area = 1e-10
tol_jacobian = 1e-6
tol_beta = 1e-10
tol_constraint = 1e-10

# stability-sweep: perturbation sizes and the window for the fitted slopes.
eps = 0.1, 0.01, 0.001, 0.0001
stability_block_res = 128
slope_min = 0.9
slope_max = 1.1

# build-family and scaling
n_max = 3
alpha = 0.5
block_res = 400
spectral_res = 4000
mass_threshold = 0.1
build_res = 1000
build_levels = 2

# dissipate
m_min = 1
m_max = 2
dissipation_eps = 0, 0.001, 0.01
solver_res = 1000
sample_k = 250
cache_nodes = 33
cfl = 0.9
max_dt = 0.002
checkpoints = 10
tail_limit = 0.01
lambda = 27.9
ratio_min = 0.5
ratio_max = 2
eps_tolerance = 0.2

# embed: forcing sweep and the lifted residual
forcing_m_max = 3
forcing_block_res = 100
forcing_times = 8
forcing_tolerance = 0.2
embed_m = 1
embed_res = 200
embed_sample_k = 50
embed_nodes = 17
embed_times = 20
embed_step = 0.001
tol_identity = 1e-10
";

/// Keys a config file must set; everything else falls back to the defaults.
pub const REQUIRED_KEYS: [&str; 2] = ["family", "eps"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Snake,
    Circle,
}

#[derive(Debug, Clone, Serialize)]
pub struct Config {
    pub family: FamilyKind,
    pub blocks: usize,
    pub seed: u64,
    pub circle_radius: f64,
    pub offsets: Vec<f64>,
    pub geometry_times: Vec<f64>,
    pub constraint_eps: f64,
    pub tol_area: f64,
    pub tol_jacobian: f64,
    pub tol_beta: f64,
    pub tol_constraint: f64,
    pub eps: Vec<f64>,
    pub stability_block_res: usize,
    pub slope_min: f64,
    pub slope_max: f64,
    pub n_max: u32,
    pub alpha: f64,
    pub block_res: usize,
    pub spectral_res: usize,
    pub mass_threshold: f64,
    pub build_res: usize,
    pub build_levels: u32,
    pub m_min: u32,
    pub m_max: u32,
    pub dissipation_eps: Vec<f64>,
    pub solver_res: usize,
    pub sample_k: usize,
    pub cache_nodes: usize,
    pub cfl: f64,
    pub max_dt: f64,
    pub checkpoints: usize,
    pub tail_limit: f64,
    pub lambda: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub eps_tolerance: f64,
    pub forcing_m_max: u32,
    pub forcing_block_res: usize,
    pub forcing_times: usize,
    pub forcing_tolerance: f64,
    pub embed_m: u32,
    pub embed_res: usize,
    pub embed_sample_k: usize,
    pub embed_nodes: usize,
    pub embed_times: usize,
    pub embed_step: f64,
    pub tol_identity: f64,
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
        let k = k.trim().to_string();
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("{k}: set twice")));
        }
    }
    Ok(out)
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn raw(&self, key: &str) -> Result<&str> {
        let v = self.0.get(key).ok_or_else(|| Error::Config(format!("{key}: missing")))?;
        if v.is_empty() {
            return Err(Error::Config(format!("{key}: empty value")));
        }
        Ok(v)
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse `{v}`")))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        self.raw(key)?
            .split(',')
            .map(|p| p.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse `{}`", p.trim()))))
            .collect()
    }
}

fn check(cond: bool, key: &str, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(format!("{key}: {what}")))
    }
}

impl Config {
    /// Parse a config file: its keys override the defaults; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let user = parse_pairs(text)?;
        let mut all = parse_pairs(DEFAULT_CONFIG)?;
        for key in REQUIRED_KEYS {
            if !user.contains_key(key) {
                return Err(Error::Config(format!("{key}: missing")));
            }
        }
        for (k, v) in user {
            if !all.contains_key(&k) {
                return Err(Error::Config(format!("{k}: unknown key")));
            }
            all.insert(k, v);
        }
        Self::from_fields(Fields(all))
    }

    pub fn defaults() -> Self {
        Self::from_fields(Fields(parse_pairs(DEFAULT_CONFIG).expect("default config parses"))).expect("defaults validate")
    }

    fn from_fields(f: Fields) -> Result<Self> {
        let family = match f.raw("family")? {
            "snake" => FamilyKind::Snake,
            "circle" => FamilyKind::Circle,
            other => return Err(Error::Config(format!("family: unknown family `{other}`"))),
        };
        let c = Config {
            family,
            blocks: f.get("blocks")?,
            seed: f.get("seed")?,
            circle_radius: f.get("circle_radius")?,
            offsets: f.list("offsets")?,
            geometry_times: f.list("geometry_times")?,
            constraint_eps: f.get("constraint_eps")?,
            tol_area: f.get("tol_area")?,
            tol_jacobian: f.get("tol_jacobian")?,
            tol_beta: f.get("tol_beta")?,
            tol_constraint: f.get("tol_constraint")?,
            eps: f.list("eps")?,
            stability_block_res: f.get("stability_block_res")?,
            slope_min: f.get("slope_min")?,
            slope_max: f.get("slope_max")?,
            n_max: f.get("n_max")?,
            alpha: f.get("alpha")?,
            block_res: f.get("block_res")?,
            spectral_res: f.get("spectral_res")?,
            mass_threshold: f.get("mass_threshold")?,
            build_res: f.get("build_res")?,
            build_levels: f.get("build_levels")?,
            m_min: f.get("m_min")?,
            m_max: f.get("m_max")?,
            dissipation_eps: f.list("dissipation_eps")?,
            solver_res: f.get("solver_res")?,
            sample_k: f.get("sample_k")?,
            cache_nodes: f.get("cache_nodes")?,
            cfl: f.get("cfl")?,
            max_dt: f.get("max_dt")?,
            checkpoints: f.get("checkpoints")?,
            tail_limit: f.get("tail_limit")?,
            lambda: f.get("lambda")?,
            ratio_min: f.get("ratio_min")?,
            ratio_max: f.get("ratio_max")?,
            eps_tolerance: f.get("eps_tolerance")?,
            forcing_m_max: f.get("forcing_m_max")?,
            forcing_block_res: f.get("forcing_block_res")?,
            forcing_times: f.get("forcing_times")?,
            forcing_tolerance: f.get("forcing_tolerance")?,
            embed_m: f.get("embed_m")?,
            embed_res: f.get("embed_res")?,
            embed_sample_k: f.get("embed_sample_k")?,
            embed_nodes: f.get("embed_nodes")?,
            embed_times: f.get("embed_times")?,
            embed_step: f.get("embed_step")?,
            tol_identity: f.get("tol_identity")?,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let tols = [
            ("tol_area", self.tol_area),
            ("tol_jacobian", self.tol_jacobian),
            ("tol_beta", self.tol_beta),
            ("tol_constraint", self.tol_constraint),
            ("tail_limit", self.tail_limit),
            ("eps_tolerance", self.eps_tolerance),
            ("forcing_tolerance", self.forcing_tolerance),
            ("tol_identity", self.tol_identity),
            ("mass_threshold", self.mass_threshold),
        ];
        for (k, v) in tols {
            check(v > 0.0 && v.is_finite(), k, "tolerance must be positive")?;
        }
        for (k, list) in [("eps", &self.eps), ("dissipation_eps", &self.dissipation_eps)] {
            check(!list.is_empty(), k, "needs at least one value")?;
            check(list.iter().all(|e| (0.0..=0.1).contains(e)), k, "values must lie in [0, 0.1]")?;
        }
        check(self.eps.len() >= 2 && self.eps.iter().all(|&e| e > 0.0), "eps", "slopes need two or more positive values")?;
        check((0.0..=0.1).contains(&self.constraint_eps), "constraint_eps", "must lie in [0, 0.1]")?;
        check(self.blocks >= 1, "blocks", "needs at least one block")?;
        check(self.circle_radius > 0.0 && self.circle_radius < 0.5, "circle_radius", "must lie in (0, 0.5)")?;
        check(self.slope_min < self.slope_max, "slope_min", "must be below slope_max")?;
        check((1..=4).contains(&self.n_max), "n_max", "must lie in 1..=4")?;
        check(self.alpha > 0.0 && self.alpha < 1.0, "alpha", "must lie in (0, 1)")?;
        check(self.build_levels <= self.n_max, "build_levels", "must not exceed n_max")?;
        check(self.build_res % (2 * 5usize.pow(self.build_levels)) == 0, "build_res", "must be a multiple of the finest tile count")?;
        check(self.m_min >= 1 && self.m_min <= self.m_max && self.m_max <= 4, "m_min", "need 1 <= m_min <= m_max <= 4")?;
        check((1..=4).contains(&self.forcing_m_max), "forcing_m_max", "must lie in 1..=4")?;
        check((1..=4).contains(&self.embed_m), "embed_m", "must lie in 1..=4")?;
        check(self.cfl > 0.0 && self.cfl <= 1.0, "cfl", "must lie in (0, 1]")?;
        check(self.max_dt > 0.0, "max_dt", "must be positive")?;
        check(self.checkpoints >= 1, "checkpoints", "needs at least one")?;
        check(self.cache_nodes >= 2 && self.embed_nodes >= 2, "cache_nodes", "needs at least two nodes")?;
        check(self.ratio_min > 0.0 && self.ratio_min < self.ratio_max, "ratio_min", "need 0 < ratio_min < ratio_max")?;
        check(self.solver_res >= 2 * self.sample_k, "solver_res", "must be at least twice sample_k")?;
        check(self.embed_res >= 2 * self.embed_sample_k, "embed_res", "must be at least twice embed_sample_k")?;
        check((2 * self.sample_k) % (2 * 5usize.pow(self.m_max)) == 0, "sample_k", "2 sample_k must be a multiple of the finest tile count")?;
        check((2 * self.embed_sample_k) % (2 * 5usize.pow(self.embed_m)) == 0, "embed_sample_k", "2 embed_sample_k must be a multiple of the finest tile count")?;
        check(self.embed_times >= 1, "embed_times", "needs at least one time")?;
        check(self.embed_step > 0.0 && self.embed_step < 0.05, "embed_step", "must lie in (0, 0.05)")?;
        Ok(())
    }

    /// Every key with its effective value, one per line, in a stable order.
    pub fn render(&self) -> String {
        let v = serde_json::to_value(self).expect("config serialises");
        let mut out = String::new();
        for (k, val) in v.as_object().expect("struct") {
            let s = match val {
                serde_json::Value::Array(a) => a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "),
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k} = {s}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_round_trip() {
        let d = Config::defaults();
        assert_eq!(d.family, FamilyKind::Snake);
        assert_eq!(d.eps, vec![0.1, 0.01, 0.001, 0.0001]);
        let again = Config::parse(&d.render()).unwrap();
        assert_eq!(again.render(), d.render());
    }

    #[test]
    fn missing_eps_names_the_field() {
        let e = Config::parse("family = snake\n").unwrap_err();
        assert!(matches!(&e, Error::Config(m) if m.starts_with("eps")), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn bad_values_name_the_field() {
        let cases = [
            ("family = snake\neps = 0.5, 0.1\n", "eps"),
            ("family = snake\neps = 0.1, 0.01\ntol_area = 0\n", "tol_area"),
            ("family = square\neps = 0.1, 0.01\n", "family"),
            ("family = snake\neps = 0.1, 0.01\ncfl = x\n", "cfl"),
            ("family = snake\neps = 0.1, 0.01\nbogus = 1\n", "bogus"),
            ("family = snake\neps = 0.1, 0.01\nm_max = 4\n", "sample_k"),
        ];
        for (text, key) in cases {
            match Config::parse(text) {
                Err(Error::Config(m)) => assert!(m.starts_with(key), "{m} should name {key}"),
                other => panic!("{key}: {other:?}"),
            }
        }
    }

    #[test]
    fn comments_and_overrides() {
        let c = Config::parse("# note\nfamily = circle  # trailing\neps = 0.01, 0.001\nseed = 9\n").unwrap();
        assert_eq!(c.family, FamilyKind::Circle);
        assert_eq!(c.seed, 9);
        assert_eq!(c.blocks, 6);
    }
}
