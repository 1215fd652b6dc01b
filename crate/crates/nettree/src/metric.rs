//! Points, the distance contract, and input ingestion.
//!
//! Every other module computes distances only through [`MetricSpace`] (or the
//! counting wrappers the tree layers on top of it), so distance computations
//! can be audited and counted. Only the Euclidean metric ships; the enum is
//! the extension point for other metrics.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;
use std::path::Path;

/// Index of a point in its dataset, assigned in ingestion order.
pub type PointId = u32;

/// The distance function of a [`MetricSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceKind {
    Euclidean,
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceKind::Euclidean => write!(f, "euclidean"),
        }
    }
}

/// An identified element of the input metric space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub id: PointId,
    pub coords: Vec<f64>,
}

/// The Euclidean distance between two coordinate slices of equal length.
fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Distance between two points, checking the dimension precondition.
pub fn distance(a: &Point, b: &Point) -> Result<f64> {
    if a.coords.len() != b.coords.len() {
        return Err(Error::Input(format!(
            "dimension mismatch: point {} has dim {}, point {} has dim {}",
            a.id,
            a.coords.len(),
            b.id,
            b.coords.len()
        )));
    }
    Ok(euclidean(&a.coords, &b.coords))
}

/// An immutable set of distinct points sharing one dimension.
///
/// Safe to share across threads once constructed.
#[derive(Debug, Clone)]
pub struct MetricSpace {
    points: Vec<Point>,
    dim: usize,
    kind: DistanceKind,
}

impl MetricSpace {
    /// Builds a space from raw coordinate rows, rejecting dimension
    /// mismatches, non-finite values, and exact coordinate duplicates.
    ///
    /// `-0.0` coordinates are normalized to `+0.0` so that zero distance and
    /// identical representation coincide.
    pub fn from_rows(rows: Vec<Vec<f64>>, dim: usize) -> Result<MetricSpace> {
        if dim == 0 {
            return Err(Error::Input("dimension must be at least 1".into()));
        }
        let mut points = Vec::with_capacity(rows.len());
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        for (i, mut coords) in rows.into_iter().enumerate() {
            let line = i + 1;
            if coords.len() != dim {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} values, found {}", dim, coords.len()),
                });
            }
            for c in coords.iter_mut() {
                if !c.is_finite() {
                    return Err(Error::Parse {
                        line,
                        msg: format!("non-finite coordinate {c}"),
                    });
                }
                if *c == 0.0 {
                    *c = 0.0;
                }
            }
            let bits: Vec<u64> = coords.iter().map(|c| c.to_bits()).collect();
            if let Some(&first) = seen.get(&bits) {
                return Err(Error::Duplicate {
                    first,
                    second: line,
                });
            }
            seen.insert(bits, line);
            points.push(Point {
                id: i as PointId,
                coords,
            });
        }
        Ok(MetricSpace {
            points,
            dim,
            kind: DistanceKind::Euclidean,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, id: PointId) -> &Point {
        &self.points[id as usize]
    }

    pub fn coords(&self, id: PointId) -> &[f64] {
        &self.points[id as usize].coords
    }

    /// Distance between two points of this space, by id.
    pub fn dist(&self, a: PointId, b: PointId) -> f64 {
        euclidean(&self.points[a as usize].coords, &self.points[b as usize].coords)
    }

    /// Distance from an external coordinate vector to a point of this space.
    pub fn dist_to(&self, q: &[f64], b: PointId) -> f64 {
        debug_assert_eq!(q.len(), self.dim);
        euclidean(q, &self.points[b as usize].coords)
    }
}

/// Reads a CSV file with one point per line and exactly `dim` comma-separated
/// decimal values, no header. Ids are assigned 0..n-1 in file order.
pub fn load_points(path: &Path, dim: usize) -> Result<MetricSpace> {
    let text = std::fs::read_to_string(path)?;
    parse_points(&text, dim)
}

/// CSV body parser behind [`load_points`]; split out so tests and the CLI can
/// ingest in-memory data.
pub fn parse_points(text: &str, dim: usize) -> Result<MetricSpace> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return Err(Error::Parse {
                line,
                msg: "empty line".into(),
            });
        }
        let mut coords = Vec::with_capacity(dim);
        for field in trimmed.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line,
                msg: format!("cannot parse '{}' as a number", field.trim()),
            })?;
            coords.push(v);
        }
        if coords.len() != dim {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} values, found {}", dim, coords.len()),
            });
        }
        rows.push(coords);
    }
    MetricSpace::from_rows(rows, dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(id: PointId, coords: &[f64]) -> Point {
        Point {
            id,
            coords: coords.to_vec(),
        }
    }

    #[test]
    fn distance_identity() {
        assert_eq!(distance(&pt(0, &[0.0]), &pt(1, &[0.0])).unwrap(), 0.0);
    }

    #[test]
    fn distance_3_4_5() {
        assert_eq!(
            distance(&pt(0, &[0.0, 0.0]), &pt(1, &[3.0, 4.0])).unwrap(),
            5.0
        );
    }

    #[test]
    fn distance_on_the_line() {
        // gap between the first two points of the {0,2,11,28} line instance
        assert_eq!(distance(&pt(0, &[0.0]), &pt(1, &[2.0])).unwrap(), 2.0);
    }

    #[test]
    fn distance_dimension_mismatch() {
        assert!(distance(&pt(0, &[0.0]), &pt(1, &[1.0, 2.0])).is_err());
    }

    #[test]
    fn parse_line_instance() {
        let space = parse_points("0\n2\n11\n28\n", 1).unwrap();
        assert_eq!(space.len(), 4);
        assert_eq!(
            space.points().iter().map(|p| p.id).collect::<Vec<_>>(),
            vec![0, 1, 2, 3]
        );
        assert_eq!(space.dist(0, 1), 2.0);
        assert_eq!(space.dist(2, 3), 17.0);
    }

    #[test]
    fn parse_empty_file() {
        let space = parse_points("", 1).unwrap();
        assert!(space.is_empty());
    }

    #[test]
    fn parse_rejects_duplicates() {
        let err = parse_points("1,1\n2,2\n1,1\n", 2).unwrap_err();
        match err {
            Error::Duplicate { first, second } => {
                assert_eq!((first, second), (1, 3));
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_malformed_row() {
        let err = parse_points("1,2\n3,x\n", 2).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_wrong_arity() {
        let err = parse_points("1,2,3\n", 2).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn negative_zero_is_a_duplicate_of_zero() {
        let err = parse_points("0\n-0\n", 1).unwrap_err();
        assert!(matches!(err, Error::Duplicate { .. }));
    }
}
