//! The 1×4 star coupler splits one photon over four outputs; those feed
//! the corners of the C4 sample, where the pattern stays put.

use ssh_hoti::coupler::{coupler_unitary, prepare_superposition, CouplerSpec};
use ssh_hoti::dynamics::{Propagator, DEFAULT_Z_GRID};
use ssh_hoti::lattice::{finite_hamiltonian, LatticeSpec};

fn main() -> ssh_hoti::Result<()> {
    let spec = CouplerSpec::canonical(0.5)?;
    let u = coupler_unitary(&spec);
    println!("coupler length {:.4} mm, entry-port output:", spec.length);
    for (port, a) in u.column(0).iter().enumerate() {
        println!("  port {port}: {:+.4} {:+.4}i", a.re, a.im);
    }

    let lattice = LatticeSpec::sample_c4();
    let h = finite_hamiltonian(&lattice)?;
    let s = prepare_superposition(&spec, h.len(), &h.grid.corners())?;
    println!("uniform split: {}, transmitted {:.6}", s.uniform, s.transmitted);

    let prop = Propagator::new(&h)?;
    let start = s.state.intensities();
    let corners = h.grid.corners();
    for z in DEFAULT_Z_GRID {
        let out = prop.evolve(&s.state, z)?.intensities();
        let drift = out.iter().zip(&start).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let on_corners: f64 = corners.iter().map(|&c| out[c]).sum();
        println!("  z = {z:>4} mm  corner intensity {on_corners:.4}  max drift {drift:.2e}");
    }
    let p = prop.mode_decomposition(&s.state)?.proportions();
    println!("corner-mode weight of the input: {:.4}", p.corner);
    Ok(())
}
