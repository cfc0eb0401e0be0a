//! Reconstruction with the two stacks replaced by exact real-part kernels.
//!
//! This is the ceiling a perfectly trained network can reach on the test
//! case: whatever error remains comes from the one-point quadrature and from
//! feeding only the real parts of the boundary data.
//!
//! ```text
//! cargo run --release --example exact_kernel_reconstruction -- [k] [step]
//! ```

use bemnet::bem::{generate_dataset, BcSpec, Wavenumber};
use bemnet::config::ReportSection;
use bemnet::experiments::ReconstructionReport;
use bemnet::geometry::{lattice_spacing, BoxDomain, PointSet};
use bemnet::model::{assemble_inputs, predict_with, ExactKernels, Normalization};

fn main() -> bemnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: f64 = args.next().map_or(1.0, |s| s.parse().expect("k"));
    let step: f64 = args.next().map_or(0.25, |s| s.parse().expect("step"));

    let domain = BoxDomain::test_case();
    let wavenumber = Wavenumber::new(k)?;
    let grid_counts = [10, 50, 30];
    let data = generate_dataset(domain, step, wavenumber, &BcSpec::test_case(), [1, 5, 3], grid_counts)?;
    let norm = Normalization::for_domain(&domain);
    let stub = ExactKernels {
        k: wavenumber,
        domain,
        normalization: norm,
    };

    let mut prediction = Vec::with_capacity(data.grid.len());
    for chunk in data.grid.points.chunks(256) {
        let inputs = assemble_inputs(&data.mesh, &data.boundary, &PointSet::new(chunk.to_vec()), &norm)?;
        prediction.extend(predict_with(&stub, &inputs)?);
    }

    let spacing = lattice_spacing(&domain, grid_counts);
    let report = ReconstructionReport::build(&data.grid, prediction, &ReportSection::default(), 0.5 * spacing[2])?;
    let s = &report.summary;
    println!("k = {k}, step = {step}, {} collocation points", data.mesh.len());
    println!(
        "within ±5%: {} / {} ({:.4}); median signed error {:.3e}; q05..q95 [{:.3e}, {:.3e}]",
        s.within_tolerance, s.evaluable, s.fraction_within_tolerance, s.median, s.q05, s.q95
    );
    Ok(())
}
