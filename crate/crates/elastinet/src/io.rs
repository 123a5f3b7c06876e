//! File formats: graph and network documents (JSON), classification and minimization
//! reports, CSV tables and SVG drawings.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::ELReport;
use crate::classify::{SquareVerdict, StrataReport, TangentAssignment, Verdict, VerdictKind};
use crate::geometry::{DiscreteCurve, EnergyBreakdown, GeometryError, Network, Point};
use crate::graph::{AngledGraph, EdgeSpec, GraphError, HalfEdge};
use crate::optimize::{LogRow, MinimizeResult, RestartSummary};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{0}")]
    Read(#[from] std::io::Error),
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unsupported dimension {0}; only 2 is supported")]
    Dimension(u32),
    #[error("bad angle {0:?}; expected a number or \"k*pi/n\"")]
    Angle(String),
    #[error("expected geometry for {expected} edges, found {found}")]
    GeometryCount { expected: usize, found: usize },
    #[error("edge {edge}: {source}")]
    Curve { edge: String, source: GeometryError },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Angle written either as radians or as an exact multiple of π.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleValue {
    Radians(f64),
    Expr(String),
}

impl AngleValue {
    pub fn radians(&self) -> Result<f64, IoError> {
        match self {
            AngleValue::Radians(r) if r.is_finite() => Ok(*r),
            AngleValue::Radians(r) => Err(IoError::Angle(r.to_string())),
            AngleValue::Expr(s) => parse_angle(s),
        }
    }
}

/// Parses `"k*pi/n"`, `"pi/n"`, `"-pi"`, `"k*pi"` or a plain number.
pub fn parse_angle(text: &str) -> Result<f64, IoError> {
    let bad = || IoError::Angle(text.to_string());
    let s: String = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    let Some((head, tail)) = s.split_once("pi") else {
        return s
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(bad);
    };
    let k = match head.strip_suffix('*').unwrap_or(head) {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let n = match tail {
        "" => 1.0,
        t => t
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(bad)?,
    };
    let v = k * PI / n;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: String,
    pub v0: String,
    pub v1: String,
    pub dir0_rad: AngleValue,
    pub dir1_rad: AngleValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveDoc {
    Points { points: Vec<[f64; 2]> },
    Singular { singular_at: [f64; 2] },
}

/// Graph document, optionally with one geometry entry per edge (a network).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub dimension: u32,
    pub edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Vec<CurveDoc>>,
}

/// Either a bare graph or a network, as read from a document.
#[derive(Clone, Debug)]
pub enum Loaded {
    Graph(AngledGraph),
    Network(Network),
}

impl Loaded {
    pub fn graph(&self) -> &AngledGraph {
        match self {
            Loaded::Graph(g) => g,
            Loaded::Network(n) => n.graph(),
        }
    }
}

fn xy(p: Point) -> [f64; 2] {
    [p.x, p.y]
}

impl NetworkDoc {
    pub fn from_graph(g: &AngledGraph) -> Self {
        let edges = (0..g.num_edges())
            .map(|e| {
                let [a, b] = g.endpoints(e);
                EdgeDoc {
                    id: g.edge_id(e).to_string(),
                    v0: g.vertex_label(a).to_string(),
                    v1: g.vertex_label(b).to_string(),
                    dir0_rad: AngleValue::Radians(g.direction(HalfEdge::new(e, 0))),
                    dir1_rad: AngleValue::Radians(g.direction(HalfEdge::new(e, 1))),
                }
            })
            .collect();
        Self {
            dimension: 2,
            edges,
            geometry: None,
        }
    }

    pub fn from_network(n: &Network) -> Self {
        let mut doc = Self::from_graph(n.graph());
        let geometry = n
            .curves()
            .iter()
            .map(|c| {
                if c.is_singular() {
                    CurveDoc::Singular {
                        singular_at: xy(c.start()),
                    }
                } else {
                    CurveDoc::Points {
                        points: c.points().iter().map(|p| xy(*p)).collect(),
                    }
                }
            })
            .collect();
        doc.geometry = Some(geometry);
        doc
    }

    pub fn graph(&self) -> Result<AngledGraph, IoError> {
        if self.dimension != 2 {
            return Err(IoError::Dimension(self.dimension));
        }
        let specs = self
            .edges
            .iter()
            .map(|e| {
                Ok(EdgeSpec::new(
                    e.id.clone(),
                    e.v0.clone(),
                    e.v1.clone(),
                    e.dir0_rad.radians()?,
                    e.dir1_rad.radians()?,
                ))
            })
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(AngledGraph::build(&specs)?)
    }

    pub fn load(&self) -> Result<Loaded, IoError> {
        let g = self.graph()?;
        let Some(geometry) = &self.geometry else {
            return Ok(Loaded::Graph(g));
        };
        if geometry.len() != g.num_edges() {
            return Err(IoError::GeometryCount {
                expected: g.num_edges(),
                found: geometry.len(),
            });
        }
        let curves = geometry
            .iter()
            .enumerate()
            .map(|(e, c)| {
                let curve = match c {
                    CurveDoc::Singular {
                        singular_at: [x, y],
                    } => Ok(DiscreteCurve::singular(Point::new(*x, *y))),
                    CurveDoc::Points { points } => {
                        DiscreteCurve::new(points.iter().map(|[x, y]| Point::new(*x, *y)).collect())
                    }
                };
                curve.map_err(|source| IoError::Curve {
                    edge: g.edge_id(e).to_string(),
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Loaded::Network(Network::new(g, curves)?))
    }
}

pub fn parse_document(text: &str) -> Result<Loaded, IoError> {
    serde_json::from_str::<NetworkDoc>(text)?.load()
}

pub fn read_document(path: &Path) -> Result<Loaded, IoError> {
    parse_document(&std::fs::read_to_string(path)?)
}

pub fn read_graph(path: &Path) -> Result<AngledGraph, IoError> {
    Ok(read_document(path)?.graph().clone())
}

pub fn read_network(path: &Path) -> Result<Network, IoError> {
    match read_document(path)? {
        Loaded::Network(n) => Ok(n),
        Loaded::Graph(g) => Err(IoError::GeometryCount {
            expected: g.num_edges(),
            found: 0,
        }),
    }
}

pub fn network_json(n: &Network) -> String {
    to_json(&NetworkDoc::from_network(n))
}

pub fn graph_json(g: &AngledGraph) -> String {
    to_json(&NetworkDoc::from_graph(g))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents serialize") + "\n"
}

/// Tangent angle per half-edge, `null` where unassigned.
fn tangent_table(g: &AngledGraph, ta: &TangentAssignment) -> Vec<[Option<f64>; 2]> {
    (0..g.num_edges())
        .map(|e| [ta.get(HalfEdge::new(e, 0)), ta.get(HalfEdge::new(e, 1))])
        .collect()
}

fn ids(g: &AngledGraph, edges: &[usize]) -> Vec<String> {
    edges.iter().map(|&e| g.edge_id(e).to_string()).collect()
}

/// Classification report: the input document plus verdict, strata, step and tangents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationDoc {
    #[serde(flatten)]
    pub input: NetworkDoc,
    pub verdict: String,
    #[serde(default)]
    pub reasons: Vec<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strata: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangents: Option<Vec<[Option<f64>; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub square_angle: Option<SquareAngleDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareAngleDoc {
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<String>,
    /// Forbidden cycle as `[edge id, endpoint]` half-edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<(String, u8)>>,
}

impl SquareAngleDoc {
    pub fn new(g: &AngledGraph, v: &SquareVerdict) -> Self {
        match v {
            SquareVerdict::Straight => Self {
                verdict: "Straight".into(),
                edge: None,
                witness: None,
            },
            SquareVerdict::NotStratified => Self {
                verdict: "NotStratified".into(),
                edge: None,
                witness: None,
            },
            SquareVerdict::StratifiedNotStraight { edge, witness } => Self {
                verdict: "StratifiedNotStraight".into(),
                edge: Some(g.edge_id(*edge).to_string()),
                witness: Some(
                    witness
                        .steps
                        .iter()
                        .map(|h| (g.edge_id(h.edge).to_string(), h.end))
                        .collect(),
                ),
            },
        }
    }
}

fn reasons_json<T: Serialize>(r: &[T]) -> Vec<serde_json::Value> {
    r.iter()
        .map(|d| serde_json::to_value(d).expect("diagnostics serialize"))
        .collect()
}

impl ClassificationDoc {
    pub fn for_network(n: &Network, v: &Verdict) -> Self {
        let g = n.graph();
        Self {
            input: NetworkDoc::from_network(n),
            verdict: format!("{:?}", v.kind),
            reasons: reasons_json(&v.reasons),
            step: v.strata.as_ref().map(|s| s.step),
            strata: v
                .strata
                .as_ref()
                .map(|s| s.strata.iter().map(|l| ids(g, l)).collect()),
            tangents: v.tangents.as_ref().map(|t| tangent_table(g, t)),
            square_angle: None,
        }
    }

    pub fn for_subgraph(g: &AngledGraph, r: &StrataReport) -> Self {
        let reasons = r
            .failure
            .as_ref()
            .map(|f| vec![serde_json::to_value(f).expect("failures serialize")])
            .unwrap_or_default();
        Self {
            input: NetworkDoc::from_graph(g),
            verdict: format!("{:?}", r.verdict),
            reasons,
            step: Some(r.step),
            strata: Some(r.strata.iter().map(|l| ids(g, l)).collect()),
            tangents: r.tangents.as_ref().map(|t| tangent_table(g, t)),
            square_angle: None,
        }
    }

    /// One-line-per-fact text form.
    pub fn text(&self) -> String {
        let mut out = format!("verdict: {}\n", self.verdict);
        if let Some(step) = self.step {
            let _ = writeln!(out, "step: {step}");
        }
        for (k, level) in self.strata.iter().flatten().enumerate() {
            let _ = writeln!(out, "H{k}: {}", level.join(" "));
        }
        for r in &self.reasons {
            let _ = writeln!(out, "reason: {r}");
        }
        if let Some(sq) = &self.square_angle {
            let _ = writeln!(out, "square-angle: {}", sq.verdict);
            if let (Some(e), Some(w)) = (&sq.edge, &sq.witness) {
                let cycle: Vec<String> = w.iter().map(|(id, z)| format!("{id}.{z}")).collect();
                let _ = writeln!(out, "witness through {e}: {}", cycle.join(" -> "));
            }
        }
        out
    }
}

/// Summary of a minimization run, written next to the network file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeSummary {
    pub energy: f64,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
    pub closure_residual: f64,
    pub lengths: Vec<f64>,
    pub degenerate_edges: Vec<String>,
    pub verdict: VerdictKind,
    pub suspicious: bool,
    pub seed: u64,
    pub restarts: Vec<RestartSummary>,
}

impl MinimizeSummary {
    pub fn new(r: &MinimizeResult) -> Self {
        let g = r.network.graph();
        Self {
            energy: r.energy,
            converged: r.converged,
            iterations: r.iterations,
            grad_norm: r.grad_norm,
            closure_residual: r.closure_residual,
            lengths: r.lengths.clone(),
            degenerate_edges: ids(g, &r.degenerate_edges),
            verdict: r.verdict,
            suspicious: r.suspicious,
            seed: r.seed,
            restarts: r.restarts.clone(),
        }
    }
}

fn csv_string(
    write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<(), csv::Error>,
) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w)?;
    let bytes = w.into_inner().map_err(|e| IoError::Read(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `edge,length,bending,energy` per edge, then a `total` row.
pub fn energy_csv(g: &AngledGraph, b: &EnergyBreakdown) -> Result<String, IoError> {
    csv_string(|w| {
        w.write_record(["edge", "length", "bending", "energy"])?;
        for (e, row) in b.edges.iter().enumerate() {
            w.serialize((g.edge_id(e), row.length, row.bending, row.energy))?;
        }
        let length: f64 = b.edges.iter().map(|r| r.length).sum();
        let bending: f64 = b.edges.iter().map(|r| r.bending).sum();
        w.serialize(("total", length, bending, b.total))
    })
}

/// `kind,id,first,second`: edges give (sup, L²), junctions give (curvature, force).
pub fn el_csv(g: &AngledGraph, r: &ELReport) -> Result<String, IoError> {
    csv_string(|w| {
        w.write_record(["kind", "id", "first", "second"])?;
        for e in &r.edges {
            w.serialize(("edge", g.edge_id(e.edge), e.sup, e.l2))?;
        }
        for j in &r.junctions {
            let labels: Vec<&str> = j.vertices.iter().map(|&v| g.vertex_label(v)).collect();
            w.serialize(("junction", labels.join("+"), j.curvature, j.force))?;
        }
        for &e in &r.skipped {
            w.serialize(("skipped", g.edge_id(e), f64::NAN, f64::NAN))?;
        }
        Ok(())
    })
}

pub fn log_csv(rows: &[LogRow]) -> Result<String, IoError> {
    csv_string(|w| {
        w.write_record(["iteration", "objective", "residual"])?;
        for r in rows {
            w.serialize((r.iteration, r.objective, r.residual))?;
        }
        Ok(())
    })
}

pub const SVG_MARGIN: f64 = 0.05;

/// SVG 1.1 drawing: curves as polylines, junctions as dots, collapsed edges as crosses.
pub fn render_svg(n: &Network, px_per_unit: f64) -> String {
    let (lo, hi) = n.bounding_box();
    let span = (hi - lo).max();
    let pad = SVG_MARGIN * if span > 0.0 { span } else { 1.0 };
    let (x0, y0) = (lo.x - pad, -(hi.y + pad));
    let (w, h) = (hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);
    let unit = w.max(h);
    let stroke = 0.004 * unit;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.2}" height="{:.2}" viewBox="{x0} {y0} {w} {h}">"#,
        w * px_per_unit,
        h * px_per_unit
    );
    // y axis up
    let _ = writeln!(
        out,
        r#"<g transform="scale(1,-1)" fill="none" stroke-linecap="round">"#
    );
    for (e, c) in n.curves().iter().enumerate() {
        if c.is_singular() {
            continue;
        }
        let pts: Vec<String> = c
            .points()
            .iter()
            .map(|p| format!("{},{}", p.x, p.y))
            .collect();
        let _ = writeln!(
            out,
            r##"<polyline id="{}" points="{}" stroke="#1f4e9c" stroke-width="{stroke}"/>"##,
            n.graph().edge_id(e),
            pts.join(" ")
        );
    }
    for (e, c) in n.curves().iter().enumerate() {
        if !c.is_singular() {
            continue;
        }
        let p = c.start();
        let r = 3.0 * stroke;
        let _ = writeln!(
            out,
            r##"<path id="{}" d="M{} {} L{} {} M{} {} L{} {}" stroke="#c0392b" stroke-width="{stroke}"/>"##,
            n.graph().edge_id(e),
            p.x - r,
            p.y - r,
            p.x + r,
            p.y + r,
            p.x - r,
            p.y + r,
            p.x + r,
            p.y - r
        );
    }
    for v in 0..n.graph().num_vertices() {
        let p = n.junction(v);
        let _ = writeln!(
            out,
            r##"<circle cx="{}" cy="{}" r="{}" fill="#222" stroke="none"/>"##,
            p.x,
            p.y,
            2.0 * stroke
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}
