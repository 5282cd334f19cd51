//! Vertex monodromy, invariant lattices, and ribbon outlines as CSV.

use slfib::monodromy_graph::{monodromy_report, ribbon_csv, ribbon_figure_data, standard_positive_vertex, RibbonGeometry};

fn main() {
    let r = monodromy_report();
    println!("all checks pass: {}", r.all_pass());
    println!("positive vertex: fixed columns {:?}, fixed rows {:?}", r.positive_lattice.column_basis, r.positive_lattice.row_basis);
    println!("negative vertex: fixed columns {:?}, fixed rows {:?}", r.negative_lattice.column_basis, r.negative_lattice.row_basis);
    let pieces = ribbon_figure_data(&standard_positive_vertex(), &RibbonGeometry::default());
    print!("{}", ribbon_csv(&pieces));
}
