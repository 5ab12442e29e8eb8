//! Singularity types and the configurations `A1^k X` that queries name.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Largest total codimension the recursion handles.
pub const MAX_CODIM: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Singularity {
    A1,
    A2,
    A3,
    A4,
    D4,
}

impl Singularity {
    pub const ALL: [Singularity; 5] = [
        Singularity::A1,
        Singularity::A2,
        Singularity::A3,
        Singularity::A4,
        Singularity::D4,
    ];

    pub fn codim(self) -> u32 {
        match self {
            Singularity::A1 => 1,
            Singularity::A2 => 2,
            Singularity::A3 => 3,
            Singularity::A4 | Singularity::D4 => 4,
        }
    }

    /// Degree of the map forgetting the marked kernel direction.
    pub fn proj_degree(self) -> u32 {
        match self {
            Singularity::A1 => 2,
            Singularity::A2 | Singularity::A3 | Singularity::A4 => 1,
            Singularity::D4 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Singularity::A1 => "A1",
            Singularity::A2 => "A2",
            Singularity::A3 => "A3",
            Singularity::A4 => "A4",
            Singularity::D4 => "D4",
        }
    }
}

impl fmt::Display for Singularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Singularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Singularity::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown singularity `{s}`")))
    }
}

/// `nodes` ordered nodes plus at most one singularity of type A2, A3, A4 or D4.
///
/// Text form: an optional `A1^k` prefix (`A1` for `k = 1`) followed by an
/// optional `A2`/`A3`/`A4`/`D4`; smooth curves are written `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub nodes: u32,
    pub extra: Option<Singularity>,
}

impl Configuration {
    pub const SMOOTH: Configuration = Configuration {
        nodes: 0,
        extra: None,
    };

    /// `δ` nodes and one singularity of type `sing`; an `A1` is folded into the
    /// node count.
    pub fn new(delta: u32, sing: Option<Singularity>) -> Self {
        match sing {
            Some(Singularity::A1) => Configuration {
                nodes: delta + 1,
                extra: None,
            },
            other => Configuration {
                nodes: delta,
                extra: other,
            },
        }
    }

    pub fn nodes(k: u32) -> Self {
        Configuration {
            nodes: k,
            extra: None,
        }
    }

    pub fn codim(&self) -> u32 {
        self.nodes + self.extra.map_or(0, Singularity::codim)
    }

    /// The `(δ, X)` split used by the recursion: the last node plays the
    /// role of the marked singularity when there is no other one.
    pub fn split(&self) -> Option<(u32, Singularity)> {
        match (self.nodes, self.extra) {
            (_, Some(x)) => Some((self.nodes, x)),
            (0, None) => None,
            (k, None) => Some((k - 1, Singularity::A1)),
        }
    }

    /// Smallest degree for which the counts are proven: `c_X + 2δ`.
    pub fn d_min(&self) -> u32 {
        match self.split() {
            None => 1,
            Some((delta, x)) => x.codim() + 2 * delta,
        }
    }

    /// `r + 2s` forced by the dimension count, if non-negative.
    pub fn condition_budget(&self, d: u32) -> Option<u32> {
        (d * (d + 3) / 2 + 3).checked_sub(self.codim())
    }

    /// `r` for a given `s`, or `None` when the cell does not exist.
    pub fn r_for(&self, d: u32, s: u32) -> Option<u32> {
        self.condition_budget(d)?.checked_sub(2 * s)
    }

    /// The twelve configurations of total codimension at most four.
    pub fn all() -> Vec<Configuration> {
        use Singularity::*;
        let mut out = Vec::new();
        for k in 0..=MAX_CODIM {
            out.push(Configuration::nodes(k));
        }
        for x in [A2, A3, A4, D4] {
            for k in 0..=MAX_CODIM - x.codim() {
                out.push(Configuration {
                    nodes: k,
                    extra: Some(x),
                });
            }
        }
        out.sort_by_key(|c| (c.codim(), c.nodes == c.codim(), c.nodes));
        out
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.nodes {
            0 => {}
            1 => parts.push("A1".to_string()),
            k => parts.push(format!("A1^{k}")),
        }
        if let Some(x) = self.extra {
            parts.push(x.to_string());
        }
        if parts.is_empty() {
            f.write_str("N")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        let mut config = Configuration::SMOOTH;
        let mut rest = tokens.as_slice();
        if let [only] = rest {
            if only.eq_ignore_ascii_case("N") {
                return Ok(config);
            }
        }
        if let Some((first, tail)) = rest.split_first() {
            let upper = first.to_ascii_uppercase();
            if let Some(exp) = upper.strip_prefix("A1^") {
                config.nodes = exp
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad node exponent in `{first}`")))?;
                rest = tail;
            } else if upper == "A1" {
                config.nodes = 1;
                rest = tail;
            }
        }
        match rest {
            [] => {}
            [x] => {
                let sing: Singularity = x.parse()?;
                if sing == Singularity::A1 {
                    return Err(Error::Parse(format!(
                        "write repeated nodes as `A1^k`, not `{s}`"
                    )));
                }
                config.extra = Some(sing);
            }
            _ => return Err(Error::Parse(format!("unexpected tokens in `{s}`"))),
        }
        if config.codim() > MAX_CODIM {
            return Err(Error::Unsupported(format!(
                "`{s}` has codimension {} > {MAX_CODIM}",
                config.codim()
            )));
        }
        Ok(config)
    }
}
