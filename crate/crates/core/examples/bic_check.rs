//! Loss on every non-corner site: the corner eigenvalues stay nearly
//! real while the rest acquire imaginary parts.

use ssh_hoti::lattice::LatticeSpec;
use ssh_hoti::spectrum::bic_non_hermitian_check;

fn main() -> ssh_hoti::Result<()> {
    for cells in 3..=5 {
        let spec = LatticeSpec::square(cells, 22.0, 9.0);
        let gamma = 0.1 * spec.couplings()?.t_b_x;
        let r = bic_non_hermitian_check(&spec, gamma)?;
        println!(
            "{cells}x{cells} cells: max corner |Im E| = {:.4e}, median bulk |Im E| = {:.4e}, ratio {:.4}",
            r.max_corner_imag,
            r.median_bulk_imag,
            r.max_corner_imag / r.median_bulk_imag
        );
    }
    Ok(())
}
