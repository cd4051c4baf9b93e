//! Run configuration: defaults, then a flat `key = value` file, then flags.

use std::fmt;
use std::str::FromStr;

use scl_core::hom_space::Budget;
use scl_core::{Error, Genus, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::InvalidArgument(format!("unknown format {s:?} (json or csv)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub genus: Genus,
    pub seed: u64,
    pub samples: u64,
    pub budget: Budget,
    pub format: Format,
    pub spec: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            genus: Genus::new(2).expect("2 is a valid genus"),
            seed: 2024,
            samples: 100_000,
            budget: Budget::default(),
            format: Format::Json,
            spec: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value {value:?} for {key}")))
}

impl Config {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "genus" | "g" => self.genus = Genus::new(parse(key, value)?)?,
            "seed" => self.seed = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "budget_visits" | "budget-visits" => self.budget.max_visits = parse(key, value)?,
            "budget_materialized_n" | "budget-materialized-n" => {
                self.budget.max_materialized_n = parse(key, value)?
            }
            "format" => self.format = value.parse()?,
            "spec" => self.spec = Some(value.to_string()),
            _ => return Err(Error::InvalidArgument(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Reads a flat `key = value` file. Blank lines and `#` comments are
    /// ignored; values may be double-quoted.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("line {}: expected key = value", i + 1)))?;
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value);
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// The file form of this configuration; reading it back gives `self`.
    #[cfg(test)]
    pub fn to_file(&self) -> String {
        let mut out = format!(
            "genus = {}\nseed = {}\nsamples = {}\nbudget_visits = {}\nbudget_materialized_n = {}\nformat = {}\n",
            self.genus.get(),
            self.seed,
            self.samples,
            self.budget.max_visits,
            self.budget.max_materialized_n,
            self.format
        );
        if let Some(spec) = &self.spec {
            out.push_str(&format!("spec = {spec}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip() {
        let mut c = Config::default();
        c.apply_file("# comment\ngenus = 3\nseed=7\nformat = \"csv\"\nspec = x=\"a1\" exps=[2]\n")
            .unwrap();
        assert_eq!(c.genus.get(), 3);
        assert_eq!(c.seed, 7);
        assert_eq!(c.format, Format::Csv);
        let mut back = Config::default();
        back.apply_file(&c.to_file()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = Config::default();
        assert!(c.apply_file("genus = 1").is_err());
        assert!(c.apply_file("colour = red").is_err());
        assert!(c.apply_file("seed").is_err());
        assert!(c.apply_file("format = xml").is_err());
    }
}
