//! Undirected simple graphs in CSR form and the linear operators built on them.

mod io;
mod labels;

pub use io::{read_edge_list, read_labels, write_edge_list, write_labels, EdgeList};
pub use labels::{LabelVector, MASKED};

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

/// Undirected simple graph. Each edge is stored in both directions, rows are
/// sorted, and there are no self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    m: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl Graph {
    /// Builds a graph from node pairs. Self-loops are dropped and repeated or
    /// reversed pairs collapse into one undirected edge.
    pub fn from_edge_list(edges: &[(usize, usize)], n: usize) -> Result<Self> {
        let mut pairs = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in edges {
            for index in [u, v] {
                if index >= n {
                    return Err(Error::NodeOutOfRange { index, n });
                }
            }
            if u != v {
                pairs.push((u, v));
                pairs.push((v, u));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut row_ptr = vec![0usize; n + 1];
        for &(u, _) in &pairs {
            row_ptr[u + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx: Vec<usize> = pairs.iter().map(|&(_, v)| v).collect();
        Ok(Self {
            n,
            m: pairs.len() / 2,
            row_ptr,
            col_idx,
        })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            m: 0,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Undirected edges with `u < v`, in row order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Dense adjacency matrix. Intended for tests and tiny graphs.
    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for u in 0..self.n {
            for &v in self.neighbors(u) {
                a[[u, v]] = 1.0;
            }
        }
        a
    }

    /// Sparse product `A·X` with the raw adjacency (no self-loops).
    pub fn adjacency_mul(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        check_rows("adjacency product", self.n, x.nrows())?;
        let d = x.ncols();
        let x = x.as_standard_layout();
        let xs = x.as_slice().expect("standard layout");
        let mut out = Array2::zeros((self.n, d));
        let os = out.as_slice_mut().expect("fresh array");
        for i in 0..self.n {
            let dst = &mut os[i * d..(i + 1) * d];
            for &j in self.neighbors(i) {
                for (o, &v) in dst.iter_mut().zip(&xs[j * d..(j + 1) * d]) {
                    *o += v;
                }
            }
        }
        Ok(out)
    }

    pub fn normalized_adjacency(&self) -> NormalizedAdjacency<'_> {
        NormalizedAdjacency::new(self)
    }
}

fn check_rows(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::shape(
            context,
            format!("{expected} rows"),
            format!("{actual} rows"),
        ))
    }
}

/// `S = D̃^{-1/2} (A + I) D̃^{-1/2}` as a matrix-free operator.
#[derive(Clone, Debug)]
pub struct NormalizedAdjacency<'g> {
    graph: &'g Graph,
    scale: Vec<f64>,
}

impl<'g> NormalizedAdjacency<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        let scale = (0..graph.n())
            .map(|i| 1.0 / ((graph.degree(i) + 1) as f64).sqrt())
            .collect();
        Self { graph, scale }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// Per-node factors `D̃_ii^{-1/2}`.
    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    /// Computes `S·X` in `O((m + n)·d)`.
    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let n = self.graph.n();
        check_rows("normalized adjacency product", n, x.nrows())?;
        let d = x.ncols();
        let x = x.as_standard_layout();
        let xs = x.as_slice().expect("standard layout");
        let mut out = Array2::zeros((n, d));
        let os = out.as_slice_mut().expect("fresh array");
        for i in 0..n {
            let si = self.scale[i];
            let dst = &mut os[i * d..(i + 1) * d];
            for (o, &v) in dst.iter_mut().zip(&xs[i * d..(i + 1) * d]) {
                *o = si * v;
            }
            for &j in self.graph.neighbors(i) {
                let sj = self.scale[j];
                for (o, &v) in dst.iter_mut().zip(&xs[j * d..(j + 1) * d]) {
                    *o += sj * v;
                }
            }
            for o in dst.iter_mut() {
                *o *= si;
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.graph.n();
        let mut s = Array2::zeros((n, n));
        for i in 0..n {
            s[[i, i]] = self.scale[i] * self.scale[i];
            for &j in self.graph.neighbors(i) {
                s[[i, j]] = self.scale[i] * self.scale[j];
            }
        }
        s
    }
}

/// The two quantities the DMoN objective needs from an assignment matrix `C`.
#[derive(Clone, Debug)]
pub struct ModularityForms {
    /// `Tr(Cᵀ B C)` with `B = A − v vᵀ / 2m`.
    pub trace_term: f64,
    /// `‖Σᵢ Cᵢ‖₂`, the norm of the column-sum vector.
    pub colsum_norm: f64,
    /// `A·C`, kept for gradient computations.
    pub ac: Array2<f64>,
    /// `vᵀ C`.
    pub degree_weighted: Array1<f64>,
    /// Column sums of `C`.
    pub colsum: Array1<f64>,
}

/// Evaluates `Tr(CᵀBC)` in operator form, never materialising `B`.
pub fn modularity_forms(g: &Graph, c: ArrayView2<'_, f64>) -> Result<ModularityForms> {
    if g.m() == 0 {
        return Err(Error::DegenerateGraph("modularity"));
    }
    let ac = g.adjacency_mul(c)?;
    let two_m = 2.0 * g.m() as f64;
    let k = c.ncols();
    let mut degree_weighted = Array1::zeros(k);
    for (i, row) in c.outer_iter().enumerate() {
        degree_weighted.scaled_add(g.degree(i) as f64, &row);
    }
    let trace_cac: f64 = (&ac * &c).sum();
    let trace_term = trace_cac - degree_weighted.dot(&degree_weighted) / two_m;
    let colsum = c.sum_axis(ndarray::Axis(0));
    let colsum_norm = colsum.dot(&colsum).sqrt();
    Ok(ModularityForms {
        trace_term,
        colsum_norm,
        ac,
        degree_weighted,
        colsum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn two_triangles() -> Graph {
        Graph::from_edge_list(&[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], 6).unwrap()
    }

    #[test]
    fn dedups_and_drops_self_loops() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 0), (2, 2)], 3).unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.degrees(), vec![1, 1, 0]);
    }

    #[test]
    fn path_graph_degrees() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2), (2, 3)], 4).unwrap();
        assert_eq!(g.degrees(), vec![1, 2, 2, 1]);
        assert_eq!(g.m(), 3);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn rejects_out_of_range() {
        let err = Graph::from_edge_list(&[(0, 5)], 4).unwrap_err();
        assert!(matches!(err, Error::NodeOutOfRange { index: 5, n: 4 }));
    }

    #[test]
    fn empty_edge_list_is_edgeless() {
        let g = Graph::from_edge_list(&[], 3).unwrap();
        assert_eq!(g.m(), 0);
        assert_eq!(g, Graph::empty(3));
    }

    #[test]
    fn normalized_single_edge() {
        let g = Graph::from_edge_list(&[(0, 1)], 2).unwrap();
        let s = g.normalized_adjacency();
        let dense = s.to_dense();
        for v in dense.iter() {
            assert!((v - 0.5).abs() < 1e-15);
        }
        let out = s.apply(array![[1.0, 0.0], [0.0, 1.0]].view()).unwrap();
        for v in out.iter() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn normalized_isolated_node() {
        let g = Graph::empty(1);
        assert_eq!(g.normalized_adjacency().to_dense(), array![[1.0]]);
    }

    #[test]
    fn normalized_triangle_is_one_third() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2), (0, 2)], 3).unwrap();
        for v in g.normalized_adjacency().to_dense().iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn apply_zero_and_regular() {
        // 4-regular circulant on 7 nodes
        let edges: Vec<_> = (0..7)
            .flat_map(|i| [(i, (i + 1) % 7), (i, (i + 2) % 7)])
            .collect();
        let g = Graph::from_edge_list(&edges, 7).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 4));
        let s = g.normalized_adjacency();
        let zero = s.apply(Array2::<f64>::zeros((7, 3)).view()).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        let ones = s.apply(Array2::<f64>::ones((7, 1)).view()).unwrap();
        assert!(ones.iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn apply_rejects_wrong_rows() {
        let g = Graph::empty(3);
        let err = g
            .normalized_adjacency()
            .apply(Array2::<f64>::zeros((2, 2)).view())
            .unwrap_err();
        assert!(matches!(err, Error::Shape { .. }));
    }

    #[test]
    fn modularity_of_two_triangles() {
        let g = two_triangles();
        let mut c = Array2::zeros((6, 2));
        for i in 0..6 {
            c[[i, i / 3]] = 1.0;
        }
        let forms = modularity_forms(&g, c.view()).unwrap();
        assert!((forms.trace_term - 6.0).abs() < 1e-12);
        assert!((forms.trace_term / (2.0 * g.m() as f64) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn modularity_uniform_assignment_is_zero() {
        let g = two_triangles();
        let c = Array2::from_elem((6, 3), 1.0 / 3.0);
        assert!(modularity_forms(&g, c.view()).unwrap().trace_term.abs() < 1e-12);
    }

    #[test]
    fn colsum_norm_single_column() {
        let g = two_triangles();
        let mut c = Array2::zeros((6, 3));
        c.column_mut(0).fill(1.0);
        assert!((modularity_forms(&g, c.view()).unwrap().colsum_norm - 6.0).abs() < 1e-12);
    }

    #[test]
    fn modularity_needs_edges() {
        let err = modularity_forms(&Graph::empty(3), Array2::zeros((3, 2)).view()).unwrap_err();
        assert!(matches!(err, Error::DegenerateGraph(_)));
    }
}
