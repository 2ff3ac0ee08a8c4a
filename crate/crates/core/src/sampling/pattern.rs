use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Disk, PlanarPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Ginibre,
    BetaGinibre,
    PalmBetaGinibre,
    Poisson,
}

impl ProcessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProcessKind::Ginibre => "ginibre",
            ProcessKind::BetaGinibre => "beta_ginibre",
            ProcessKind::PalmBetaGinibre => "palm_beta_ginibre",
            ProcessKind::Poisson => "poisson",
        }
    }
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProcessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ginibre" => Ok(ProcessKind::Ginibre),
            "beta_ginibre" | "beta-ginibre" => Ok(ProcessKind::BetaGinibre),
            "palm_beta_ginibre" | "palm" => Ok(ProcessKind::PalmBetaGinibre),
            "poisson" => Ok(ProcessKind::Poisson),
            other => Err(Error::Domain(format!("unknown process kind '{other}'"))),
        }
    }
}

/// A finite simple point pattern with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPattern {
    pub points: Vec<PlanarPoint>,
    pub window: Disk,
    pub kind: ProcessKind,
    pub beta: f64,
    pub seed: u64,
}

impl PointPattern {
    pub fn new(points: Vec<PlanarPoint>, window: Disk, kind: ProcessKind, beta: f64, seed: u64) -> Self {
        Self { points, window, kind, beta, seed }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points in `disk` (closed).
    pub fn count_in(&self, disk: &Disk) -> usize {
        self.points.iter().filter(|p| disk.contains(**p)).count()
    }

    /// Checks containment in the window and absence of repeated points.
    pub fn check(&self) -> Result<()> {
        if let Some(p) = self.points.iter().find(|p| !self.window.contains(**p)) {
            return Err(Error::Structural(format!("point {p} lies outside the window")));
        }
        let mut keys: Vec<(u64, u64)> =
            self.points.iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect();
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Structural("pattern contains a repeated point".into()));
        }
        Ok(())
    }

    /// Writes the pattern as CSV. Floats use the shortest representation
    /// that parses back to the same bits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# process={} beta={} radius={} seed={}",
            self.kind, self.beta, self.window.radius, self.seed
        )?;
        writeln!(out, "x,y")?;
        for p in &self.points {
            writeln!(out, "{},{}", p.x, p.y)?;
        }
        Ok(())
    }

    /// Reads a pattern written by [`PointPattern::write_csv`]. The window
    /// is the origin-centered disk of the recorded radius.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut kind = None;
        let mut beta = None;
        let mut radius = None;
        let mut seed = None;
        let mut header = false;
        let mut points = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                for field in meta.split_whitespace() {
                    let Some((k, v)) = field.split_once('=') else { continue };
                    let bad = |m: String| Error::Parse { line: lineno, message: m };
                    match k {
                        "process" => kind = Some(v.parse::<ProcessKind>().map_err(|e| bad(e.to_string()))?),
                        "beta" => beta = Some(v.parse::<f64>().map_err(|e| bad(format!("beta: {e}")))?),
                        "radius" => radius = Some(v.parse::<f64>().map_err(|e| bad(format!("radius: {e}")))?),
                        "seed" => seed = Some(v.parse::<u64>().map_err(|e| bad(format!("seed: {e}")))?),
                        _ => {}
                    }
                }
                continue;
            }
            if !header {
                if line.replace(' ', "") != "x,y" {
                    return Err(Error::Parse { line: lineno, message: "expected header 'x,y'".into() });
                }
                header = true;
                continue;
            }
            let (xs, ys) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse { line: lineno, message: "expected two fields".into() })?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse { line: lineno, message: e.to_string() })
            };
            points.push(PlanarPoint::new(parse(xs)?, parse(ys)?));
        }
        let missing = |what: &str| Error::Parse { line: 1, message: format!("missing '{what}' in comment line") };
        let radius = radius.ok_or_else(|| missing("radius"))?;
        let window = Disk::centered(radius)?;
        Ok(Self {
            points,
            window,
            kind: kind.ok_or_else(|| missing("process"))?,
            beta: beta.ok_or_else(|| missing("beta"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn check_flags_duplicates_and_escapes() {
        let w = Disk::centered(1.0).unwrap();
        let p = PlanarPoint::new(0.1, 0.2);
        assert!(PointPattern::new(vec![p, p], w, ProcessKind::Poisson, 1.0, 0).check().is_err());
        let out = PlanarPoint::new(1.1, 0.0);
        assert!(PointPattern::new(vec![out], w, ProcessKind::Poisson, 1.0, 0).check().is_err());
        assert!(PointPattern::new(vec![p], w, ProcessKind::Poisson, 1.0, 0).check().is_ok());
    }

    #[test]
    fn parse_errors_carry_line() {
        let text = "# process=ginibre beta=1 radius=2 seed=3\nx,y\n0.5,abc\n";
        match PointPattern::read_csv(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(PointPattern::read_csv("x,y\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_bit_exact(
            pts in prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), 0..50),
            beta in 0.01..1.0f64,
            seed in any::<u64>(),
        ) {
            let points: Vec<PlanarPoint> = pts.iter().map(|p| PlanarPoint::new(p.0, p.1)).collect();
            let pattern = PointPattern::new(points, Disk::centered(2000.0).unwrap(), ProcessKind::BetaGinibre, beta, seed);
            let mut buf = Vec::new();
            pattern.write_csv(&mut buf).unwrap();
            let back = PointPattern::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.points.len(), pattern.points.len());
            for (a, b) in back.points.iter().zip(&pattern.points) {
                prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
                prop_assert_eq!(a.y.to_bits(), b.y.to_bits());
            }
            prop_assert_eq!(back.beta.to_bits(), beta.to_bits());
            prop_assert_eq!(back.seed, seed);
            prop_assert_eq!(back.kind, ProcessKind::BetaGinibre);
        }
    }
}
