//! The line-oriented circuit file format.
//!
//! ```text
//! circuit n=2 q=2305843009213693951
//! 0 var 1
//! 1 var 2
//! 2 times 0 1
//! 3 timesp p=1 0 2
//! 4 plus 2 3*5
//! root 4
//! ```

use std::fmt::Write as _;

use super::{Child, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::field::{modulus, Fp};
use crate::ncpoly::parse_header;

impl Circuit {
    pub fn to_text(&self) -> String {
        let mut s = format!("circuit n={} q={}\n", self.n(), modulus());
        for (id, g) in self.gates().iter().enumerate() {
            let _ = write!(s, "{id} ");
            match g.kind {
                GateKind::Var(j) => {
                    let _ = write!(s, "var {j}");
                }
                GateKind::Const(c) => {
                    let _ = write!(s, "const {c}");
                }
                GateKind::Plus => s.push_str("plus"),
                GateKind::Times => s.push_str("times"),
                GateKind::TimesP(p) => {
                    let _ = write!(s, "timesp p={p}");
                }
            }
            for ch in &g.children {
                let _ = write!(s, " {}", ch.id);
                if let Some(c) = ch.scalar {
                    let _ = write!(s, "*{c}");
                }
            }
            s.push('\n');
        }
        match self.root() {
            Some(r) => {
                let _ = writeln!(s, "root {r}");
            }
            None => s.push_str("root none\n"),
        }
        s
    }

    /// Parses the format written by [`to_text`](Self::to_text). Blank lines
    /// and lines starting with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(Error::Malformed { line: 1, msg: "empty input".into() })?;
        let fields = parse_header(header, "circuit", &["n", "q"], hl)?;
        let (n, q) = (fields[0] as usize, fields[1]);
        if q != modulus() {
            return Err(Error::Malformed { line: hl, msg: format!("file is over q={q}, field is q={}", modulus()) });
        }
        let mut gates: Vec<Gate> = Vec::new();
        let mut root: Option<Option<usize>> = None;
        for (ln, line) in lines {
            let bad = |msg: String| Error::Malformed { line: ln, msg };
            if root.is_some() {
                return Err(bad("content after the root line".into()));
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks[0] == "root" {
                root = Some(match toks.get(1) {
                    Some(&"none") => None,
                    Some(t) => Some(t.parse().map_err(|_| bad(format!("bad root {t:?}")))?),
                    None => return Err(bad("missing root id".into())),
                });
                if toks.len() > 2 {
                    return Err(bad("trailing tokens after root".into()));
                }
                continue;
            }
            let id: usize = toks[0].parse().map_err(|_| bad(format!("bad gate id {:?}", toks[0])))?;
            if id != gates.len() {
                return Err(bad(format!("expected gate id {}, found {id}", gates.len())));
            }
            let kind_tok = toks.get(1).ok_or_else(|| bad("missing gate kind".into()))?;
            let mut rest = &toks[2..];
            let num = |t: &str| -> Result<u64> { t.parse().map_err(|_| bad(format!("bad number {t:?}"))) };
            let kind = match *kind_tok {
                "var" => {
                    let j = num(rest.first().ok_or_else(|| bad("missing variable index".into()))?)?;
                    rest = &rest[1..];
                    GateKind::Var(u16::try_from(j).map_err(|_| bad(format!("variable {j} too large")))?)
                }
                "const" => {
                    let c = num(rest.first().ok_or_else(|| bad("missing constant".into()))?)?;
                    if c >= q {
                        return Err(bad(format!("constant {c} is not reduced mod q")));
                    }
                    rest = &rest[1..];
                    GateKind::Const(Fp::new(c))
                }
                "plus" => GateKind::Plus,
                "times" => GateKind::Times,
                "timesp" => {
                    let t = rest.first().ok_or_else(|| bad("missing p=".into()))?;
                    let p = t.strip_prefix("p=").ok_or_else(|| bad(format!("expected p=, found {t:?}")))?;
                    rest = &rest[1..];
                    GateKind::TimesP(num(p)? as usize)
                }
                other => return Err(bad(format!("unknown gate kind {other:?}"))),
            };
            let mut children = Vec::with_capacity(rest.len());
            for t in rest {
                let child = match t.split_once('*') {
                    Some((a, c)) => {
                        let c = num(c)?;
                        if c >= q {
                            return Err(bad(format!("scalar {c} is not reduced mod q")));
                        }
                        Child::weighted(num(a)? as usize, Fp::new(c))
                    }
                    None => Child::new(num(t)? as usize),
                };
                children.push(child);
            }
            gates.push(Gate { kind, children });
        }
        let root = root.ok_or(Error::Malformed { line: text.lines().count(), msg: "missing root line".into() })?;
        Circuit::new(n, gates, root)
    }
}
