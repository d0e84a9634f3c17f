//! Near the gap closing the corner modes of a small lattice overlap, and
//! light injected at one corner spreads evenly over all four.

use ssh_hoti::experiments::{finite_gap_scan, finite_gap_separations};
use ssh_hoti::lattice::LatticeSpec;

fn main() -> ssh_hoti::Result<()> {
    let d_b = 11.0;
    println!("{:>5} {:>7} {:>7}  corner shares", "d_a", "ta/tb", "z");
    for d_a in finite_gap_separations() {
        let spec = LatticeSpec::square(4, d_a, d_b);
        let t = spec.couplings()?;
        let split = finite_gap_scan(&spec, (10.0, 30.0), 200)?;
        println!(
            "{d_a:>5.1} {:>7.4} {:>7.2}  {:.3?}",
            t.t_a_x / t.t_b_x,
            split.z,
            split.shares
        );
    }
    Ok(())
}
