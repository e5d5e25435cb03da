use std::fmt;
use std::str::FromStr;

use bochner_core::optimize::{lin_space, log_space};
use serde::Deserialize;

/// `min,max,count[,log]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "GridRepr")]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GridRepr {
    Text(String),
    Fields {
        min: f64,
        max: f64,
        count: usize,
        #[serde(default)]
        log: bool,
    },
}

impl TryFrom<GridRepr> for GridSpec {
    type Error = String;

    fn try_from(r: GridRepr) -> Result<Self, String> {
        match r {
            GridRepr::Text(s) => s.parse(),
            GridRepr::Fields { min, max, count, log } => GridSpec::new(min, max, count, log),
        }
    }
}

impl GridSpec {
    pub fn new(min: f64, max: f64, count: usize, log: bool) -> Result<Self, String> {
        if count == 0 {
            return Err("grid count must be at least 1".into());
        }
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(format!("grid bounds [{min}, {max}] are not an ordered finite pair"));
        }
        if log && !(min > 0.0) {
            return Err(format!("log grid needs a positive minimum, got {min}"));
        }
        Ok(Self { min, max, count, log })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.log {
            log_space(self.min, self.max, self.count)
        } else {
            lin_space(self.min, self.max, self.count)
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let (nums, log) = match parts.as_slice() {
            [a, b, c] => ([*a, *b, *c], false),
            [a, b, c, "log"] => ([*a, *b, *c], true),
            [a, b, c, "lin"] => ([*a, *b, *c], false),
            _ => return Err(format!("grid `{s}` is not `min,max,count[,log]`")),
        };
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| format!("`{t}` in grid `{s}` is not a number"))
        };
        let count = nums[2]
            .parse::<usize>()
            .map_err(|_| format!("`{}` in grid `{s}` is not a count", nums[2]))?;
        GridSpec::new(num(nums[0])?, num(nums[1])?, count, log)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.min, self.max, self.count)?;
        if self.log {
            write!(f, ",log")?;
        }
        Ok(())
    }
}

/// Parses `a,b,c` or an inclusive integer range `lo-hi`.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| format!("`{t}` in `{s}` is not valid"))
        })
        .collect()
}

pub fn parse_int_list(s: &str) -> Result<Vec<u32>, String> {
    if let Some((a, b)) = s.split_once('-') {
        let a: u32 = a.trim().parse().map_err(|_| format!("bad range `{s}`"))?;
        let b: u32 = b.trim().parse().map_err(|_| format!("bad range `{s}`"))?;
        if a > b {
            return Err(format!("empty range `{s}`"));
        }
        return Ok((a..=b).collect());
    }
    parse_list(s)
}
