use std::path::{Path, PathBuf};

use drinfeld_core::reciprocity::{CampaignConfig, Suite};
use drinfeld_core::{Error, Result};

/// Settings shared by every command, after merging flags, config file and defaults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub p: u32,
    pub s: u32,
    pub module: String,
    pub m0: u32,
    pub n: usize,
    pub m: usize,
    pub prec: Option<i64>,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub suite: Suite,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 3,
            s: 1,
            module: "carlitz".into(),
            m0: 1,
            n: 1,
            m: 1,
            prec: None,
            samples: 20,
            seed: 0,
            out: None,
            suite: Suite::All,
        }
    }
}

/// Settings given on the command line or in a file; `None` means unset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub p: Option<u32>,
    pub s: Option<u32>,
    pub module: Option<String>,
    pub m0: Option<u32>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub prec: Option<i64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub suite: Option<Suite>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("invalid value {value:?} for {key}")))
}

impl Overrides {
    /// Reads `key = value` lines; `#` starts a comment.
    pub fn parse_file(text: &str) -> Result<Overrides> {
        let mut o = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "p" => o.p = Some(parse_value(key, value)?),
                "s" => o.s = Some(parse_value(key, value)?),
                "module" => o.module = Some(value.to_string()),
                "m0" => o.m0 = Some(parse_value(key, value)?),
                "n" => o.n = Some(parse_value(key, value)?),
                "m" => o.m = Some(parse_value(key, value)?),
                "prec" => o.prec = Some(parse_value(key, value)?),
                "samples" => o.samples = Some(parse_value(key, value)?),
                "seed" => o.seed = Some(parse_value(key, value)?),
                "out" => o.out = Some(PathBuf::from(value)),
                "suite" => o.suite = Some(value.parse()?),
                _ => return Err(Error::Parse(format!("line {}: unknown key {key:?}", lineno + 1))),
            }
        }
        Ok(o)
    }

    pub fn read_file(path: &Path) -> Result<Overrides> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("config file {}: {e}", path.display())))?;
        Self::parse_file(&text)
    }

    /// `self` where set, else `lower`.
    pub fn over(self, lower: Overrides) -> Overrides {
        Overrides {
            p: self.p.or(lower.p),
            s: self.s.or(lower.s),
            module: self.module.or(lower.module),
            m0: self.m0.or(lower.m0),
            n: self.n.or(lower.n),
            m: self.m.or(lower.m),
            prec: self.prec.or(lower.prec),
            samples: self.samples.or(lower.samples),
            seed: self.seed.or(lower.seed),
            out: self.out.or(lower.out),
            suite: self.suite.or(lower.suite),
        }
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let d = RunConfig::default();
        let cfg = RunConfig {
            p: self.p.unwrap_or(d.p),
            s: self.s.unwrap_or(d.s),
            module: self.module.unwrap_or(d.module),
            m0: self.m0.unwrap_or(d.m0),
            n: self.n.unwrap_or(d.n),
            m: self.m.unwrap_or(d.m),
            prec: self.prec.or(d.prec),
            samples: self.samples.unwrap_or(d.samples),
            seed: self.seed.unwrap_or(d.seed),
            out: self.out.or(d.out),
            suite: self.suite.unwrap_or(d.suite),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.p < 2 || !(2..self.p).take_while(|d| d * d <= self.p).all(|d| self.p % d != 0) {
            return Err(Error::Usage(format!("p = {} is not prime", self.p)));
        }
        if self.s == 0 || self.m0 == 0 {
            return Err(Error::Usage("s and m0 must be positive".into()));
        }
        if self.n == 0 || self.n > self.m {
            return Err(Error::Usage(format!("levels must satisfy 1 <= n <= m (n={}, m={})", self.n, self.m)));
        }
        if self.samples == 0 {
            return Err(Error::Usage("sample count must be positive".into()));
        }
        if self.prec.is_some_and(|p| p < 1) {
            return Err(Error::Usage("precision must be positive".into()));
        }
        Ok(())
    }

    pub fn campaign(&self) -> CampaignConfig {
        CampaignConfig {
            module: self.module.clone(),
            p: self.p,
            s: self.s,
            m0: self.m0,
            n: self.n,
            m: self.m,
            prec: self.prec,
            samples: self.samples,
            seed: self.seed,
        }
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_format() {
        let o = Overrides::parse_file("# campaign\np = 2\n\nsuite = chi-twist  # trailing\nmodule = custom(rho_t = \"t + (1+t)*tau\")\n").unwrap();
        assert_eq!(o.p, Some(2));
        assert_eq!(o.suite, Some(Suite::ChiTwist));
        assert_eq!(o.module.as_deref(), Some("custom(rho_t = \"t + (1+t)*tau\")"));
        for bad in ["p", "p = x", "colour = red", "suite = most"] {
            assert!(matches!(Overrides::parse_file(bad), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let file = Overrides::parse_file("p = 2\nm = 2\nseed = 7").unwrap();
        let flags = Overrides {
            p: Some(5),
            ..Default::default()
        };
        let cfg = flags.over(file).resolve().unwrap();
        assert_eq!((cfg.p, cfg.m, cfg.seed, cfg.n, cfg.samples), (5, 2, 7, 1, 20));
    }

    #[test]
    fn invalid_settings() {
        for o in [
            Overrides { p: Some(4), ..Default::default() },
            Overrides { n: Some(2), ..Default::default() },
            Overrides { samples: Some(0), ..Default::default() },
            Overrides { s: Some(0), ..Default::default() },
        ] {
            assert!(matches!(o.resolve(), Err(Error::Usage(_))));
        }
    }
}
