//! Band structure on both sides of the transition `t_a = t_b`.
//!
//! The gap above the lowest band closes at the transition and reopens with
//! the lowest band's C4 character at M swapped.
//!
//! ```bash
//! cargo run --example band_inversion
//! ```

use ssh_hoti::bands::{band_gap, band_structure, lowest_band_character, Hsp, KPath, Rotation};
use ssh_hoti::lattice::{BulkModel, Couplings};

fn main() -> ssh_hoti::Result<()> {
    let path = KPath::standard(40);
    println!("{:>6} {:>10} {:>10} {:>8}", "ta/tb", "gap", "E1(M)", "char(M)");
    for ratio in [0.3, 0.6, 1.0, 1.4, 2.0] {
        let model = BulkModel::new(Couplings::isotropic(ratio, 1.0));
        let gap = band_gap(&model, 101);
        let bands = band_structure(&model, &path.points);
        let m_index = 2 * 40; // end of the X–M segment
        let character = lowest_band_character(&model, Hsp::M, Rotation::C4)
            .map(|p| p.to_string())
            .unwrap_or_else(|_| "-".into());
        println!(
            "{ratio:>6.2} {:>10.3e} {:>10.4} {character:>8}",
            gap.gap_size, bands.energies[m_index][0]
        );
    }
    Ok(())
}
