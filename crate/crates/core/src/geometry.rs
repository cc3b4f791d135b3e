//! Simplex encoding of class labels.
//!
//! A problem with `c` classes is embedded in `c - 1` dimensions: each class is
//! a vertex of a regular simplex inscribed in the unit sphere. A fitted model
//! predicts a point in that space and the nearest vertex names the class.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{Result, VdaError};

/// The `c` vertices of a regular simplex centred at the origin, stored as the
/// rows of a `c x (c - 1)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSet {
    vertices: DMatrix<f64>,
}

impl VertexSet {
    /// Builds the unit simplex for `c` classes.
    ///
    /// Vertex 1 is `(c-1)^{-1/2} * 1`; vertex `j >= 2` is `a * 1 + b * e_{j-1}`
    /// with `a = -(1 + sqrt(c)) / (c-1)^{3/2}` and `b = sqrt(c / (c-1))`.
    pub fn new(c: usize) -> Result<Self> {
        if c < 2 {
            return Err(VdaError::InvalidClassCount(c));
        }
        let cf = c as f64;
        let dim = c - 1;
        let df = dim as f64;
        let a = -(1.0 + cf.sqrt()) / df.powf(1.5);
        let b = (cf / df).sqrt();

        let mut vertices = DMatrix::zeros(c, dim);
        vertices.row_mut(0).fill(1.0 / df.sqrt());
        for j in 1..c {
            let mut row = vertices.row_mut(j);
            row.fill(a);
            row[j - 1] += b;
        }
        // The closed form is exact in real arithmetic; renormalising removes
        // the last-ulp drift (for c = 2 it makes the vertices exactly +1/-1).
        for mut row in vertices.row_iter_mut() {
            let norm = row.norm();
            row /= norm;
        }
        Ok(Self { vertices })
    }

    pub fn n_classes(&self) -> usize {
        self.vertices.nrows()
    }

    /// Dimension of the embedding space, `c - 1`.
    pub fn dim(&self) -> usize {
        self.vertices.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.vertices
    }

    pub fn vertex(&self, j: usize) -> Vec<f64> {
        self.vertices.row(j).iter().copied().collect()
    }

    /// Index of the vertex nearest to `point`. Ties go to the smaller index.
    pub fn classify(&self, point: &[f64]) -> Result<usize> {
        if point.len() != self.dim() {
            return Err(VdaError::shape(format!(
                "point has dimension {}, vertices live in dimension {}",
                point.len(),
                self.dim()
            )));
        }
        Ok(self.nearest(point.iter().copied()))
    }

    /// Classifies every row of an `n x (c - 1)` prediction matrix.
    pub fn classify_rows(&self, predictions: &DMatrix<f64>) -> Result<Vec<usize>> {
        if predictions.ncols() != self.dim() {
            return Err(VdaError::shape(format!(
                "predictions have {} columns, expected {}",
                predictions.ncols(),
                self.dim()
            )));
        }
        Ok(predictions
            .row_iter()
            .map(|row| self.nearest(row.iter().copied()))
            .collect())
    }

    fn nearest(&self, point: impl Iterator<Item = f64> + Clone) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (j, vertex) in self.vertices.row_iter().enumerate() {
            let dist: f64 = vertex
                .iter()
                .zip(point.clone())
                .map(|(v, x)| (v - x) * (v - x))
                .sum();
            if dist < best_dist {
                best = j;
                best_dist = dist;
            }
        }
        best
    }
}

/// Largest dead-zone radius for which the balls around the vertices do not
/// overlap: `sqrt(2c / (c - 1)) / 2`, half the common vertex spacing.
pub fn max_epsilon(c: usize) -> Result<f64> {
    if c < 2 {
        return Err(VdaError::InvalidClassCount(c));
    }
    let cf = c as f64;
    Ok(0.5 * (2.0 * cf / (cf - 1.0)).sqrt())
}

/// Maps class names to vertex indices.
///
/// Names are sorted lexicographically, so class `j` in sorted order is
/// always encoded by vertex `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelCodec {
    class_names: Vec<String>,
    vertices: VertexSet,
}

impl LabelCodec {
    /// Builds a codec from an explicit list of class names. Duplicates are
    /// rejected; the order given is ignored in favour of sorted order.
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let set: BTreeSet<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        if set.len() != names.len() {
            return Err(VdaError::input("class names must be distinct"));
        }
        let class_names: Vec<String> = set.into_iter().collect();
        let vertices = VertexSet::new(class_names.len())?;
        Ok(Self {
            class_names,
            vertices,
        })
    }

    /// Builds a codec from the distinct values of a label column.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let set: BTreeSet<&str> = labels.iter().map(|s| s.as_ref()).collect();
        let names: Vec<&str> = set.into_iter().collect();
        Self::new(&names)
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.class_names
            .binary_search_by(|name| name.as_str().cmp(label))
            .map_err(|_| VdaError::UnknownClass(label.to_string()))
    }

    pub fn name(&self, index: usize) -> &str {
        &self.class_names[index]
    }

    /// Converts raw labels into class indices.
    pub fn indices<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.index_of(l.as_ref())).collect()
    }

    /// Stacks the vertex of each label into an `n x (c - 1)` matrix.
    pub fn encode<S: AsRef<str>>(&self, labels: &[S]) -> Result<DMatrix<f64>> {
        let idx = self.indices(labels)?;
        self.encode_indices(&idx)
    }

    /// Same as [`LabelCodec::encode`] for labels already given as indices.
    pub fn encode_indices(&self, labels: &[usize]) -> Result<DMatrix<f64>> {
        encode_indices(&self.vertices, labels)
    }
}

/// Stacks vertex rows for class indices.
pub fn encode_indices(vertices: &VertexSet, labels: &[usize]) -> Result<DMatrix<f64>> {
    let c = vertices.n_classes();
    let mut y = DMatrix::zeros(labels.len(), vertices.dim());
    for (i, &label) in labels.iter().enumerate() {
        if label >= c {
            return Err(VdaError::UnknownClass(label.to_string()));
        }
        y.row_mut(i).copy_from(&vertices.matrix().row(label));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn two_classes_are_plus_minus_one() {
        let v = VertexSet::new(2).unwrap();
        assert_eq!(v.vertex(0), vec![1.0]);
        assert_eq!(v.vertex(1), vec![-1.0]);
    }

    #[test]
    fn three_classes_form_an_equilateral_triangle() {
        let v = VertexSet::new(3).unwrap();
        for j in 0..3 {
            let norm = v.vertex(j).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!((dist(&v.vertex(i), &v.vertex(j)) - 3f64.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_single_class() {
        assert!(matches!(VertexSet::new(1), Err(VdaError::InvalidClassCount(1))));
        assert!(max_epsilon(0).is_err());
    }

    #[test]
    fn max_epsilon_values() {
        assert_eq!(max_epsilon(2).unwrap(), 1.0);
        assert!((max_epsilon(3).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        for c in 2..12 {
            let v = VertexSet::new(c).unwrap();
            let d = dist(&v.vertex(0), &v.vertex(c - 1));
            assert!((d - 2.0 * max_epsilon(c).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn encode_two_class_labels() {
        let codec = LabelCodec::from_labels(&["A", "B", "A"]).unwrap();
        let y = codec.encode(&["A", "B", "A"]).unwrap();
        assert_eq!(y.as_slice(), &[1.0, -1.0, 1.0]);
        let empty: [&str; 0] = [];
        assert_eq!(codec.encode(&empty).unwrap().nrows(), 0);
        assert!(matches!(codec.encode(&["C"]), Err(VdaError::UnknownClass(_))));
    }

    #[test]
    fn codec_orders_lexicographically() {
        let codec = LabelCodec::from_labels(&["setosa", "virginica", "versicolor", "setosa"]).unwrap();
        assert_eq!(codec.class_names(), &["setosa", "versicolor", "virginica"]);
        assert_eq!(codec.index_of("virginica").unwrap(), 2);
        assert!(LabelCodec::new(&["a", "a"]).is_err());
    }

    #[test]
    fn classify_edge_cases() {
        let v = VertexSet::new(2).unwrap();
        assert_eq!(v.classify(&[0.3]).unwrap(), 0);
        assert_eq!(v.classify(&[-1.0]).unwrap(), 1);
        assert_eq!(v.classify(&[0.0]).unwrap(), 0);
        assert!(matches!(v.classify(&[0.0, 1.0]), Err(VdaError::Shape(_))));
    }

    #[test]
    fn classify_round_trips_encoding() {
        for c in 2..15 {
            let codec_names: Vec<String> = (0..c).map(|j| format!("{j:02}")).collect();
            let codec = LabelCodec::new(&codec_names).unwrap();
            let y = codec.encode(&codec_names).unwrap();
            let back = codec.vertices().classify_rows(&y).unwrap();
            assert_eq!(back, (0..c).collect::<Vec<_>>());
        }
    }
}
