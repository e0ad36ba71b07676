//! Built-in laws and the law catalog file format.

use serde::{Deserialize, Serialize};

use super::{BoundaryLaw, Expr, Piece, Tail};
use crate::error::{Error, Result};

const WINDOW: f64 = 10.0;
const RESOLUTION: f64 = 1e-3;

pub fn fixture_names() -> &'static [&'static str] {
    &["remark-floor-cube", "remark-sqrt", "sign", "step", "linear", "zero"]
}

/// Looks up a built-in law by name.
pub fn fixture(name: &str) -> Result<BoundaryLaw> {
    let w = WINDOW;
    let cube = || Expr::FloorPoly(vec![0.0, 0.0, 0.0, 1.0]);
    let (pieces, delta0) = match name {
        // ⌊s³⌋ for |s| ≥ 1, -s inside
        "remark-floor-cube" => (
            vec![
                Piece::new(-w, -1.0, cube()),
                Piece::new(-1.0, 1.0, Expr::linear(-1.0, 0.0)),
                Piece::new(1.0, w, cube()),
            ],
            1.0,
        ),
        "remark-sqrt" => (
            vec![Piece {
                offset: 1.0,
                ..Piece::new(-w, w, Expr::AbsPow { scale: 1.0, power: 0.5 })
            }],
            1.0,
        ),
        "sign" => (
            vec![
                Piece::new(-w, 0.0, Expr::Const(-1.0)),
                Piece::new(0.0, w, Expr::Const(1.0)),
            ],
            0.1,
        ),
        "step" => (
            vec![
                Piece::new(-w, 0.0, Expr::Const(0.0)),
                Piece::new(0.0, w, Expr::Const(1.0)),
            ],
            0.1,
        ),
        "linear" => (vec![Piece::new(-w, w, Expr::linear(1.0, 0.0))], 0.1),
        "zero" => (vec![Piece::new(-w, w, Expr::Const(0.0))], 0.1),
        other => {
            return Err(Error::Config(format!(
                "unknown law fixture {other:?}; known: {}",
                fixture_names().join(", ")
            )))
        }
    };
    BoundaryLaw::new(name, pieces, w, Tail::Formula, Tail::Formula, delta0, RESOLUTION)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub start: f64,
    pub end: f64,
    /// `const c`, `poly a0 a1 …`, `floor_poly a0 a1 …` or `abs_pow scale power`.
    pub expr: String,
    #[serde(default)]
    pub offset: f64,
}

/// On-disk description of a law: either a fixture name (with optional
/// `delta0` override) or a full piece list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<PieceSpec>,
    #[serde(rename = "window_W", default, skip_serializing_if = "Option::is_none")]
    pub window_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_left: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_right: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
}

impl LawFile {
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            message: e.to_string(),
        })
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("law file serialises")
    }

    pub fn from_law(law: &BoundaryLaw) -> Self {
        LawFile {
            name: Some(law.name().to_string()),
            fixture: None,
            pieces: law
                .pieces()
                .iter()
                .map(|p| PieceSpec {
                    start: p.start,
                    end: p.end,
                    expr: p.expr.to_string(),
                    offset: p.offset,
                })
                .collect(),
            window_w: Some(law.window()),
            tail_left: Some(law.tail_left().to_string()),
            tail_right: Some(law.tail_right().to_string()),
            delta0: Some(law.delta0()),
            resolution: Some(law.resolution()),
        }
    }

    pub fn into_law(self) -> Result<BoundaryLaw> {
        if let Some(name) = &self.fixture {
            if !self.pieces.is_empty() {
                return Err(Error::Config(
                    "law: give either `fixture` or `pieces`, not both".into(),
                ));
            }
            let mut law = fixture(name)?;
            if let Some(d) = self.delta0 {
                law = law.with_delta0(d)?;
            }
            return Ok(law);
        }
        let missing = |key: &str| Error::Config(format!("law: missing key `{key}`"));
        let window = self.window_w.ok_or_else(|| missing("window_W"))?;
        let parse_tail = |key: &str, v: &Option<String>| -> Result<Tail> {
            v.as_deref()
                .ok_or_else(|| missing(key))?
                .parse()
                .map_err(|e| Error::Config(format!("law: key `{key}`: {e}")))
        };
        let tail_left = parse_tail("tail_left", &self.tail_left)?;
        let tail_right = parse_tail("tail_right", &self.tail_right)?;
        let delta0 = self.delta0.ok_or_else(|| missing("delta0"))?;
        let resolution = self.resolution.unwrap_or(RESOLUTION);
        let pieces = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let expr: Expr = p
                    .expr
                    .parse()
                    .map_err(|e| Error::Config(format!("law: pieces[{i}].expr: {e}")))?;
                Ok(Piece {
                    offset: p.offset,
                    ..Piece::new(p.start, p.end, expr)
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if pieces.is_empty() {
            return Err(missing("pieces"));
        }
        BoundaryLaw::new(
            self.name.unwrap_or_else(|| "custom".into()),
            pieces,
            window,
            tail_left,
            tail_right,
            delta0,
            resolution,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_builds() {
        for name in fixture_names() {
            let law = fixture(name).unwrap();
            assert_eq!(law.name(), *name);
        }
        assert!(fixture("nope").is_err());
    }

    #[test]
    fn law_file_round_trip() {
        for name in fixture_names() {
            let law = fixture(name).unwrap();
            let text = LawFile::from_law(&law).to_text();
            let back = LawFile::parse(&text, "mem").unwrap().into_law().unwrap();
            assert_eq!(back, law, "{text}");
        }
    }

    #[test]
    fn inline_law_file() {
        let text = r#"
name = "kinked"
window_W = 4.0
tail_left = "nonpositive"
tail_right = "bounded(2.0)"
delta0 = 0.5
resolution = 1e-3

[[pieces]]
start = -4.0
end = 0.0
expr = "poly 0 2"

[[pieces]]
start = 0.0
end = 4.0
expr = "const 1"
offset = 0.5
"#;
        let law = LawFile::parse(text, "inline").unwrap().into_law().unwrap();
        assert_eq!(law.value(1.0).unwrap(), 1.5);
        assert_eq!(law.value(-1.0).unwrap(), -2.0);
        assert_eq!(law.tail_right(), Tail::Bounded(2.0));
    }

    #[test]
    fn parse_errors_name_the_key() {
        let err = LawFile::parse("window_W = \"ten\"", "bad.toml").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.toml") && msg.contains("window_W"), "{msg}");
        let err = LawFile::parse("windw = 3.0", "bad.toml").unwrap_err();
        assert!(err.to_string().contains("windw"));
        let missing = LawFile::parse("window_W = 3.0", "m").unwrap().into_law().unwrap_err();
        assert!(missing.to_string().contains("tail_left"));
    }
}
