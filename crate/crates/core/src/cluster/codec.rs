use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Cluster, EdgeRecord, EXTERIOR, P2};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub id: i64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: i64,
    pub tail: i64,
    pub head: i64,
    pub bulge: f64,
    pub left: i64,
    pub right: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionDoc {
    pub id: i64,
    pub label: String,
}

/// On-disk cluster document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterDocument {
    pub version: u32,
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
    pub regions: Vec<RegionDoc>,
    pub exterior: i64,
}

impl From<&Cluster> for ClusterDocument {
    fn from(c: &Cluster) -> Self {
        ClusterDocument {
            version: FORMAT_VERSION,
            vertices: c.vertices.iter().enumerate().map(|(i, p)| VertexDoc { id: i as i64, x: p.x, y: p.y }).collect(),
            edges: c
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| EdgeDoc {
                    id: i as i64,
                    tail: e.tail as i64,
                    head: e.head as i64,
                    bulge: e.bulge,
                    left: e.left as i64,
                    right: e.right as i64,
                })
                .collect(),
            regions: c.labels.iter().enumerate().map(|(i, l)| RegionDoc { id: i as i64, label: l.clone() }).collect(),
            exterior: EXTERIOR as i64,
        }
    }
}

impl TryFrom<ClusterDocument> for Cluster {
    type Error = Error;

    fn try_from(doc: ClusterDocument) -> Result<Self> {
        if doc.version != FORMAT_VERSION {
            return Err(Error::Parse(format!("version: unsupported value {}", doc.version)));
        }
        if doc.exterior != EXTERIOR as i64 {
            return Err(Error::Parse(format!("exterior: must be 0, found {}", doc.exterior)));
        }
        let n = doc.regions.len().saturating_sub(1);
        if n < 2 {
            return Err(Error::Parse(format!("regions: need the exterior plus at least 2 regions, found {n}")));
        }
        let mut labels = vec![None; doc.regions.len()];
        for (k, r) in doc.regions.iter().enumerate() {
            let slot = usize::try_from(r.id)
                .ok()
                .filter(|&i| i < labels.len())
                .ok_or_else(|| Error::Parse(format!("regions[{k}].id: {} is out of range 0..={n}", r.id)))?;
            if labels[slot].replace(r.label.clone()).is_some() {
                return Err(Error::Parse(format!("regions[{k}].id: duplicate id {}", r.id)));
            }
        }
        let labels: Vec<String> = labels.into_iter().map(|l| l.expect("every slot filled")).collect();

        let mut vid = HashMap::new();
        for (k, v) in doc.vertices.iter().enumerate() {
            if vid.insert(v.id, k).is_some() {
                return Err(Error::Parse(format!("vertices[{k}].id: duplicate id {}", v.id)));
            }
            if !v.x.is_finite() || !v.y.is_finite() {
                return Err(Error::Parse(format!("vertices[{k}]: coordinates must be finite")));
            }
        }
        let vertices = doc.vertices.iter().map(|v| P2::new(v.x, v.y)).collect();
        let region = |k: usize, field: &str, id: i64| {
            usize::try_from(id)
                .ok()
                .filter(|&i| i < labels.len())
                .ok_or_else(|| Error::Parse(format!("edges[{k}].{field}: unknown region {id}")))
        };
        let mut edges = Vec::with_capacity(doc.edges.len());
        for (k, e) in doc.edges.iter().enumerate() {
            let vertex = |field: &str, id: i64| {
                vid.get(&id).copied().ok_or_else(|| Error::Parse(format!("edges[{k}].{field}: unknown vertex {id}")))
            };
            if !e.bulge.is_finite() {
                return Err(Error::Parse(format!("edges[{k}].bulge: must be finite")));
            }
            edges.push(EdgeRecord {
                tail: vertex("tail", e.tail)?,
                head: vertex("head", e.head)?,
                bulge: e.bulge,
                left: region(k, "left", e.left)?,
                right: region(k, "right", e.right)?,
            });
        }
        Cluster::with_labels(vertices, edges, labels)
    }
}

/// Pretty printer writing every float with 17 significant digits, so that
/// output is byte-stable and parses back to the same bits.
struct Fixed17<'a>(serde_json::ser::PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + std::io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl serde_json::ser::Formatter for Fixed17<'_> {
    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );

    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

/// Pretty JSON with floats at 17 significant digits. Non-finite floats are
/// written as `null`.
pub fn json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization does not fail");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Serializes a cluster as a pretty-printed JSON document.
pub fn to_json(c: &Cluster) -> String {
    json_string(&ClusterDocument::from(c))
}

/// Parses a cluster document. Errors name the offending field and, for
/// syntax problems, the line and column.
pub fn from_json(text: &str) -> Result<Cluster> {
    let doc: ClusterDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Cluster::try_from(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lens() -> Cluster {
        let v = vec![P2::new(0.0, 0.5), P2::new(0.0, -0.5)];
        let e = vec![
            EdgeRecord { tail: 0, head: 1, bulge: 0.3, left: 1, right: 0 },
            EdgeRecord { tail: 0, head: 1, bulge: 0.1, left: 2, right: 1 },
            EdgeRecord { tail: 1, head: 0, bulge: 0.3, left: 2, right: 0 },
        ];
        Cluster::new(v, e, 2).unwrap()
    }

    #[test]
    fn roundtrip_is_exact() {
        let c = lens().transformed(1.0 / 3.0, 0.7, P2::new(0.1, 1e-7));
        let back = from_json(&to_json(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(json_string(&[0.1, -2.0]), "[\n  1.0000000000000001e-1,\n  -2.0000000000000000e0\n]");
        assert_eq!(json_string(&f64::NAN), "null");
        let text = to_json(&lens());
        assert_eq!(text, to_json(&from_json(&text).unwrap()));
    }

    #[test]
    fn empty_document_rejected() {
        let text = r#"{"version":1,"vertices":[],"edges":[],"regions":[],"exterior":0}"#;
        assert!(matches!(from_json(text), Err(Error::Parse(_))));
    }

    #[test]
    fn missing_fields_are_named() {
        let full: serde_json::Value = serde_json::from_str(&to_json(&lens())).unwrap();
        let cases: Vec<(Vec<&str>, &str)> = vec![
            (vec!["version"], "version"),
            (vec!["exterior"], "exterior"),
            (vec!["vertices", "0", "x"], "x"),
            (vec!["vertices", "1", "id"], "id"),
            (vec!["edges", "2", "bulge"], "bulge"),
            (vec!["edges", "0", "left"], "left"),
            (vec!["regions", "1", "label"], "label"),
        ];
        for (path, name) in cases {
            let mut doc = full.clone();
            let mut node = &mut doc;
            for p in &path[..path.len() - 1] {
                node = match p.parse::<usize>() {
                    Ok(i) => &mut node[i],
                    Err(_) => &mut node[*p],
                };
            }
            node.as_object_mut().unwrap().remove(path[path.len() - 1]);
            let err = from_json(&doc.to_string()).unwrap_err().to_string();
            assert!(err.contains(&format!("`{name}`")), "{err}");
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = from_json("{\n \"version\": 1,\n \"vertices\": [,]\n}").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn unknown_references_rejected() {
        let mut doc = ClusterDocument::from(&lens());
        doc.edges[1].head = 9;
        let err = Cluster::try_from(doc).unwrap_err().to_string();
        assert!(err.contains("edges[1].head"), "{err}");
    }
}
