//! Integer monodromy around edges and trivalent vertices of the
//! discriminant, fixed lattices, and ribbon plot data.
//!
//! Matrices act on `H₁(T³; Z) ≅ Z³` by left multiplication on column
//! vectors and on `H¹` by right multiplication on row vectors.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub type IVec3 = [i64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonodromyMatrix {
    pub entries: [[i64; 3]; 3],
}

impl MonodromyMatrix {
    pub const fn new(entries: [[i64; 3]; 3]) -> Self {
        MonodromyMatrix { entries }
    }

    pub const fn identity() -> Self {
        MonodromyMatrix::new([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    }

    pub fn mul(&self, other: &MonodromyMatrix) -> MonodromyMatrix {
        let mut out = [[0i64; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, o) in row.iter_mut().enumerate() {
                *o = (0..3).map(|k| self.entries[i][k] * other.entries[k][j]).sum();
            }
        }
        MonodromyMatrix::new(out)
    }

    pub fn transpose(&self) -> MonodromyMatrix {
        let e = &self.entries;
        let mut out = [[0i64; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, o) in row.iter_mut().enumerate() {
                *o = e[j][i];
            }
        }
        MonodromyMatrix::new(out)
    }

    pub fn det(&self) -> i64 {
        let m = &self.entries;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// `M − I`.
    pub fn minus_identity(&self) -> [[i64; 3]; 3] {
        let mut e = self.entries;
        for (i, row) in e.iter_mut().enumerate() {
            row[i] -= 1;
        }
        e
    }

    /// `(M − I)³ = 0`.
    pub fn is_unipotent(&self) -> bool {
        let n = MonodromyMatrix::new(self.minus_identity());
        n.mul(&n).mul(&n).entries == [[0; 3]; 3]
    }

    pub fn apply(&self, v: IVec3) -> IVec3 {
        let e = &self.entries;
        [0, 1, 2].map(|i| e[i][0] * v[0] + e[i][1] * v[1] + e[i][2] * v[2])
    }

    /// Row vector times matrix.
    pub fn apply_row(&self, w: IVec3) -> IVec3 {
        let e = &self.entries;
        [0, 1, 2].map(|j| w[0] * e[0][j] + w[1] * e[1][j] + w[2] * e[2][j])
    }

    pub fn row(&self, i: usize) -> IVec3 {
        self.entries[i]
    }

    pub fn is_identity(&self) -> bool {
        *self == MonodromyMatrix::identity()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexKind {
    Positive,
    Negative,
}

/// What the three edge monodromies of a vertex leave fixed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedDescriptor {
    /// Fixed classes in `H₁` together with a fixed direction in `H¹`.
    Vectors { vectors: Vec<IVec3>, co_direction: IVec3 },
    /// One fixed class in `H₁` and a fixed hyperplane in `H¹`, given by its normal.
    VectorAndHyperplane { vector: IVec3, hyperplane_normal: IVec3 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexModel {
    pub kind: VertexKind,
    pub edge_matrices: [MonodromyMatrix; 3],
    pub euler_characteristic: i32,
    pub fixed: FixedDescriptor,
}

impl VertexModel {
    /// `M₁ · M₂ · M₃`.
    pub fn product(&self) -> MonodromyMatrix {
        let [m1, m2, m3] = &self.edge_matrices;
        m1.mul(m2).mul(m3)
    }

    pub fn with_order(&self, order: [usize; 3]) -> VertexModel {
        let mut v = self.clone();
        v.edge_matrices = order.map(|i| self.edge_matrices[i]);
        v
    }

    /// A vertex whose three matrices are all the identity.
    pub fn trivial(kind: VertexKind) -> VertexModel {
        let id = MonodromyMatrix::identity();
        VertexModel {
            kind,
            edge_matrices: [id; 3],
            euler_characteristic: 0,
            fixed: FixedDescriptor::Vectors {
                vectors: vec![[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                co_direction: [0, 0, 0],
            },
        }
    }
}

pub fn standard_edge() -> MonodromyMatrix {
    MonodromyMatrix::new([[1, 1, 0], [0, 1, 0], [0, 0, 1]])
}

pub fn standard_positive_vertex() -> VertexModel {
    VertexModel {
        kind: VertexKind::Positive,
        edge_matrices: [
            MonodromyMatrix::new([[1, 0, 0], [1, 1, 0], [0, 0, 1]]),
            MonodromyMatrix::new([[1, 0, 0], [0, 1, 0], [-1, 0, 1]]),
            MonodromyMatrix::new([[1, 0, 0], [-1, 1, 0], [1, 0, 1]]),
        ],
        euler_characteristic: 1,
        fixed: FixedDescriptor::Vectors {
            vectors: vec![[0, 1, 0], [0, 0, -1], [0, -1, 1]],
            co_direction: [1, 0, 0],
        },
    }
}

pub fn standard_negative_vertex() -> VertexModel {
    VertexModel {
        kind: VertexKind::Negative,
        edge_matrices: [
            MonodromyMatrix::new([[1, 1, 0], [0, 1, 0], [0, 0, 1]]),
            MonodromyMatrix::new([[1, 0, -1], [0, 1, 0], [0, 0, 1]]),
            MonodromyMatrix::new([[1, -1, 1], [0, 1, 0], [0, 0, 1]]),
        ],
        euler_characteristic: -1,
        fixed: FixedDescriptor::VectorAndHyperplane {
            vector: [1, 0, 0],
            hyperplane_normal: [1, 0, 0],
        },
    }
}

/// Going once around all three edges of a vertex is a contractible loop.
pub fn vertex_consistency(v: &VertexModel) -> bool {
    v.product().is_identity()
}

/// Each matrix of `p` is the transpose of the matching matrix of `n`.
pub fn duality_check(p: &VertexModel, n: &VertexModel) -> bool {
    p.edge_matrices.iter().zip(&n.edge_matrices).all(|(a, b)| a.transpose() == *b)
}

/// Fixed sublattice on columns and fixed co-sublattice on rows, each as a
/// reduced integer basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantLattice {
    pub column_basis: Vec<IVec3>,
    pub row_basis: Vec<IVec3>,
}

impl InvariantLattice {
    pub fn column_rank(&self) -> usize {
        self.column_basis.len()
    }

    pub fn row_rank(&self) -> usize {
        self.row_basis.len()
    }

    pub fn contains_column(&self, v: IVec3) -> bool {
        in_span(&self.column_basis, v)
    }

    pub fn contains_row(&self, w: IVec3) -> bool {
        in_span(&self.row_basis, w)
    }
}

pub fn invariant_lattice(v: &VertexModel) -> InvariantLattice {
    let mut col_rows = Vec::with_capacity(9);
    let mut row_rows = Vec::with_capacity(9);
    for m in &v.edge_matrices {
        let n = m.minus_identity();
        col_rows.extend_from_slice(&n);
        let nt = MonodromyMatrix::new(n).transpose();
        row_rows.extend_from_slice(&nt.entries);
    }
    InvariantLattice {
        column_basis: integer_kernel(&col_rows),
        row_basis: integer_kernel(&row_rows),
    }
}

/// Basis of `{x ∈ Z³ : A x = 0}` by unimodular column operations on `A`,
/// returned in Hermite form.
pub fn integer_kernel(a: &[IVec3]) -> Vec<IVec3> {
    let mut a: Vec<IVec3> = a.to_vec();
    let mut u = [[1i64, 0, 0], [0, 1, 0], [0, 0, 1]];
    let mut pivot = 0usize;
    let swap_cols = |a: &mut Vec<IVec3>, u: &mut [[i64; 3]; 3], p: usize, q: usize| {
        for r in a.iter_mut() {
            r.swap(p, q);
        }
        for r in u.iter_mut() {
            r.swap(p, q);
        }
    };
    // column c -= k * column p
    let sub_col = |a: &mut Vec<IVec3>, u: &mut [[i64; 3]; 3], c: usize, p: usize, k: i64| {
        for r in a.iter_mut() {
            r[c] -= k * r[p];
        }
        for r in u.iter_mut() {
            r[c] -= k * r[p];
        }
    };
    for row in 0..a.len() {
        if pivot == 3 {
            break;
        }
        loop {
            let nz: Vec<usize> = (pivot..3).filter(|&c| a[row][c] != 0).collect();
            if nz.is_empty() {
                break;
            }
            let best = *nz.iter().min_by_key(|&&c| a[row][c].abs()).unwrap();
            swap_cols(&mut a, &mut u, pivot, best);
            let mut done = true;
            for c in pivot + 1..3 {
                if a[row][c] != 0 {
                    let k = a[row][c].div_euclid(a[row][pivot]);
                    sub_col(&mut a, &mut u, c, pivot, k);
                    if a[row][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                pivot += 1;
                break;
            }
        }
    }
    let basis: Vec<IVec3> = (pivot..3).map(|c| [u[0][c], u[1][c], u[2][c]]).collect();
    hermite_rows(basis)
}

/// Row Hermite normal form: positive pivots, entries above each pivot
/// reduced into `[0, pivot)`.
fn hermite_rows(mut rows: Vec<IVec3>) -> Vec<IVec3> {
    let mut r = 0usize;
    for col in 0..3 {
        if r == rows.len() {
            break;
        }
        loop {
            let nz: Vec<usize> = (r..rows.len()).filter(|&i| rows[i][col] != 0).collect();
            if nz.is_empty() {
                break;
            }
            let best = *nz.iter().min_by_key(|&&i| rows[i][col].abs()).unwrap();
            rows.swap(r, best);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][col] != 0 {
                    let k = rows[i][col].div_euclid(rows[r][col]);
                    for j in 0..3 {
                        rows[i][j] -= k * rows[r][j];
                    }
                    if rows[i][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                if rows[r][col] < 0 {
                    rows[r] = rows[r].map(|x| -x);
                }
                for i in 0..r {
                    let k = rows[i][col].div_euclid(rows[r][col]);
                    for j in 0..3 {
                        rows[i][j] -= k * rows[r][j];
                    }
                }
                r += 1;
                break;
            }
        }
    }
    rows.retain(|v| *v != [0, 0, 0]);
    rows
}

/// Membership of `v` in the integer span of Hermite-form `basis`.
fn in_span(basis: &[IVec3], v: IVec3) -> bool {
    let mut rest = v;
    for b in basis {
        let Some(col) = (0..3).find(|&j| b[j] != 0) else { continue };
        if rest[col] % b[col] != 0 {
            return false;
        }
        let k = rest[col] / b[col];
        for j in 0..3 {
            rest[j] -= k * b[j];
        }
    }
    rest == [0, 0, 0]
}

/// Presentation parameters of the ribbon figures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RibbonGeometry {
    pub spine_length: f64,
    pub width: f64,
    pub overhang: f64,
}

impl Default for RibbonGeometry {
    fn default() -> Self {
        RibbonGeometry {
            spine_length: 2.0,
            width: 0.5,
            overhang: 0.25,
        }
    }
}

/// A planar polygon (or a segment, at zero width) in the base `R³`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RibbonPiece {
    pub piece_id: usize,
    pub normal: IVec3,
    pub vertices: Vec<[f64; 3]>,
}

fn lin(p: [f64; 3], s: f64, q: [f64; 3], t: f64) -> [f64; 3] {
    [0, 1, 2].map(|i| s * p[i] + t * q[i])
}

/// Ribbons of a perturbed vertex. Positive: three rectangles in
/// `{x₂=0}`, `{x₃=0}`, `{x₂=x₃}` sharing the segment `[0, w]` of the
/// x₁-axis and running a little past it. Negative: three arms of a Y in
/// `{x₁=0}` overlapping at the centre. Zero width leaves the spines.
pub fn ribbon_figure_data(v: &VertexModel, geom: &RibbonGeometry) -> Vec<RibbonPiece> {
    let RibbonGeometry {
        spine_length: l,
        width: w,
        overhang,
    } = *geom;
    let o = overhang.min(w);
    let quad = |origin: [f64; 3], along: [f64; 3], across: [f64; 3], a0: f64, a1: f64, c0: f64, c1: f64| {
        let pts = [(a0, c0), (a0, c1), (a1, c1), (a1, c0)];
        let mut vs: Vec<[f64; 3]> = Vec::new();
        for (a, c) in pts {
            let p = lin(along, a, across, c);
            let p = [origin[0] + p[0], origin[1] + p[1], origin[2] + p[2]];
            if vs.last() != Some(&p) && vs.first() != Some(&p) {
                vs.push(p);
            }
        }
        vs
    };
    match v.kind {
        VertexKind::Positive => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let arms: [(IVec3, [f64; 3]); 3] = [
                ([0, 1, 0], [0.0, 0.0, 1.0]),
                ([0, 0, 1], [0.0, 1.0, 0.0]),
                ([0, 1, -1], [0.0, -h, -h]),
            ];
            arms.iter()
                .enumerate()
                .map(|(id, &(normal, dir))| RibbonPiece {
                    piece_id: id,
                    normal,
                    vertices: quad([0.0; 3], dir, [1.0, 0.0, 0.0], -o, l, 0.0, w),
                })
                .collect()
        }
        VertexKind::Negative => (0..3)
            .map(|id| {
                let phi = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * id as f64 / 3.0;
                let dir = [0.0, phi.cos(), phi.sin()];
                let across = [0.0, -phi.sin(), phi.cos()];
                RibbonPiece {
                    piece_id: id,
                    normal: [1, 0, 0],
                    vertices: quad([0.0; 3], dir, across, -o, l, -0.5 * w, 0.5 * w),
                }
            })
            .collect(),
    }
}

/// `piece_id,x1,x2,x3` rows, one per polygon vertex.
pub fn ribbon_csv(pieces: &[RibbonPiece]) -> String {
    let mut s = String::from("piece_id,x1,x2,x3\n");
    for p in pieces {
        for q in &p.vertices {
            let _ = writeln!(s, "{},{:?},{:?},{:?}", p.piece_id, q[0], q[1], q[2]);
        }
    }
    s
}

/// All basis-independent checks of one vertex and the edge matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub edge_det: i64,
    pub edge_unipotent: bool,
    pub positive_dets: [i64; 3],
    pub negative_dets: [i64; 3],
    pub all_unipotent: bool,
    pub positive_consistent: bool,
    pub negative_consistent: bool,
    pub duality: bool,
    pub positive_lattice: InvariantLattice,
    pub negative_lattice: InvariantLattice,
    /// Product with the first two matrices swapped, recorded as computed.
    pub positive_swapped_product: MonodromyMatrix,
    pub negative_swapped_product: MonodromyMatrix,
}

impl MonodromyReport {
    pub fn all_pass(&self) -> bool {
        let p = &self.positive_lattice;
        let n = &self.negative_lattice;
        self.edge_det == 1
            && self.edge_unipotent
            && self.positive_dets == [1; 3]
            && self.negative_dets == [1; 3]
            && self.all_unipotent
            && self.positive_consistent
            && self.negative_consistent
            && self.duality
            && p.contains_column([0, 1, 0])
            && p.contains_column([0, 0, -1])
            && p.contains_column([0, -1, 1])
            && p.row_basis == vec![[1, 0, 0]]
            && n.column_basis == vec![[1, 0, 0]]
            && n.row_rank() == 2
            && n.contains_row([0, 1, 0])
            && n.contains_row([0, 0, 1])
    }
}

pub fn monodromy_report() -> MonodromyReport {
    let e = standard_edge();
    let p = standard_positive_vertex();
    let n = standard_negative_vertex();
    MonodromyReport {
        edge_det: e.det(),
        edge_unipotent: e.is_unipotent(),
        positive_dets: p.edge_matrices.map(|m| m.det()),
        negative_dets: n.edge_matrices.map(|m| m.det()),
        all_unipotent: p.edge_matrices.iter().chain(&n.edge_matrices).all(|m| m.is_unipotent()),
        positive_consistent: vertex_consistency(&p),
        negative_consistent: vertex_consistency(&n),
        duality: duality_check(&p, &n),
        positive_lattice: invariant_lattice(&p),
        negative_lattice: invariant_lattice(&n),
        positive_swapped_product: p.with_order([1, 0, 2]).product(),
        negative_swapped_product: n.with_order([1, 0, 2]).product(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_entries() {
        assert_eq!(standard_edge().row(0), [1, 1, 0]);
        assert_eq!(standard_positive_vertex().edge_matrices[1].entries[2][0], -1);
        assert_eq!(standard_negative_vertex().edge_matrices[2].row(0), [1, -1, 1]);
    }

    #[test]
    fn determinants_and_unipotency() {
        let mut all = vec![standard_edge()];
        all.extend(standard_positive_vertex().edge_matrices);
        all.extend(standard_negative_vertex().edge_matrices);
        for m in all {
            assert_eq!(m.det(), 1);
            assert!(m.is_unipotent());
        }
        assert!(!MonodromyMatrix::new([[2, 1, 0], [1, 1, 0], [0, 0, 1]]).is_unipotent());
    }

    #[test]
    fn vertex_products_are_identity() {
        assert!(vertex_consistency(&standard_positive_vertex()));
        assert!(vertex_consistency(&standard_negative_vertex()));
    }

    #[test]
    fn swapped_order_is_recorded() {
        let p = standard_positive_vertex().with_order([1, 0, 2]).product();
        let n = standard_negative_vertex().with_order([1, 0, 2]).product();
        // all three matrices commute at either vertex
        assert!(p.is_identity());
        assert!(n.is_identity());
    }

    #[test]
    fn duality() {
        let p = standard_positive_vertex();
        let n = standard_negative_vertex();
        assert!(duality_check(&p, &n));
        assert!(duality_check(&n, &p));
        let t = VertexModel::trivial(VertexKind::Positive);
        assert!(duality_check(&t, &t));
        assert!(!duality_check(&p, &p));
    }

    #[test]
    fn fixed_lattices() {
        let lp = invariant_lattice(&standard_positive_vertex());
        assert_eq!(lp.column_basis, vec![[0, 1, 0], [0, 0, 1]]);
        assert!(lp.contains_column([0, 1, 0]));
        assert!(lp.contains_column([0, 0, -1]));
        assert!(lp.contains_column([0, -1, 1]));
        assert!(!lp.contains_column([1, 0, 0]));
        assert_eq!(lp.row_basis, vec![[1, 0, 0]]);
        let ln = invariant_lattice(&standard_negative_vertex());
        assert_eq!(ln.column_basis, vec![[1, 0, 0]]);
        assert_eq!(ln.row_basis, vec![[0, 1, 0], [0, 0, 1]]);
        // rows fixed at the positive vertex are the columns fixed at the negative one
        assert_eq!(lp.row_basis, ln.column_basis);
    }

    #[test]
    fn kernel_of_edge_matrix() {
        let n = standard_edge().minus_identity();
        assert_eq!(integer_kernel(&n), vec![[1, 0, 0], [0, 0, 1]]);
        assert_eq!(integer_kernel(&[[2, 4, 6]]), vec![[1, 1, -1], [0, 3, -2]]);
        assert!(integer_kernel(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]]).is_empty());
    }

    #[test]
    fn kernel_basis_is_saturated() {
        // 2x = 2y: the kernel contains (1,1,0), not only (2,2,0)
        let k = integer_kernel(&[[2, -2, 0]]);
        assert!(in_span(&k, [1, 1, 0]));
        assert!(in_span(&k, [0, 0, 1]));
        assert_eq!(k.len(), 2);
    }

    #[test]
    fn positive_ribbons_lie_in_dual_hyperplanes() {
        let pieces = ribbon_figure_data(&standard_positive_vertex(), &RibbonGeometry::default());
        assert_eq!(pieces.len(), 3);
        let fixed = [[0.0, 1.0, 0.0], [0.0, 0.0, -1.0], [0.0, -1.0, 1.0]];
        let normals: Vec<IVec3> = pieces.iter().map(|p| p.normal).collect();
        assert_eq!(normals, vec![[0, 1, 0], [0, 0, 1], [0, 1, -1]]);
        for (p, f) in pieces.iter().zip(fixed) {
            assert_eq!(p.vertices.len(), 4);
            for q in &p.vertices {
                let dot: f64 = (0..3).map(|i| q[i] * f[i]).sum();
                assert!(dot.abs() < 1e-15);
            }
            // crosses the common segment of the x₁-axis
            let on_axis = |q: &[f64; 3]| q[1].abs() < 1e-15 && q[2].abs() < 1e-15;
            assert!(!p.vertices.iter().any(on_axis));
        }
    }

    #[test]
    fn negative_ribbons_share_one_plane() {
        let pieces = ribbon_figure_data(&standard_negative_vertex(), &RibbonGeometry::default());
        assert_eq!(pieces.len(), 3);
        for p in &pieces {
            assert_eq!(p.normal, [1, 0, 0]);
            assert!(p.vertices.iter().all(|q| q[0] == 0.0));
        }
    }

    #[test]
    fn zero_width_gives_spines() {
        let g = RibbonGeometry {
            width: 0.0,
            ..RibbonGeometry::default()
        };
        for v in [standard_positive_vertex(), standard_negative_vertex()] {
            for p in ribbon_figure_data(&v, &g) {
                assert_eq!(p.vertices.len(), 2);
                assert_eq!(p.vertices[0], [0.0; 3]);
                let end = p.vertices[1];
                let len = (end[0] * end[0] + end[1] * end[1] + end[2] * end[2]).sqrt();
                assert!((len - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_layout() {
        let pieces = ribbon_figure_data(&standard_negative_vertex(), &RibbonGeometry::default());
        let csv = ribbon_csv(&pieces);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("piece_id,x1,x2,x3"));
        assert_eq!(lines.count(), 12);
    }

    #[test]
    fn report_passes() {
        let r = monodromy_report();
        assert!(r.all_pass());
        let s = serde_json::to_string(&r).unwrap();
        let back: MonodromyReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
