//! Open-boundary spectrum of the C4 sample: chiral symmetry of the
//! spectrum, the four corner states and their spatial profile.

use ssh_hoti::lattice::{finite_hamiltonian, LatticeSpec, Region};
use ssh_hoti::spectrum::{
    classify_states, eigendecompose, spatial_distribution, zero_energy_window, DEFAULT_CORNER_THRESHOLD,
    DEFAULT_EDGE_THRESHOLD,
};

fn main() -> ssh_hoti::Result<()> {
    let spec = LatticeSpec::sample_c4();
    let h = finite_hamiltonian(&spec)?;
    let sol = classify_states(eigendecompose(&h)?, DEFAULT_CORNER_THRESHOLD, DEFAULT_EDGE_THRESHOLD);

    let n = sol.len();
    let asym = (0..n)
        .map(|i| (sol.energies[i] + sol.energies[n - 1 - i]).abs())
        .fold(0.0, f64::max);
    println!("{n} sites, spectral range {:.4} 1/mm", sol.spectral_range());
    println!("max |E_i + E_(N+1-i)| = {asym:.2e}");

    for region in [Region::Corner, Region::Edge, Region::Bulk] {
        println!("{region:?}: {} states", sol.indices_labelled(region).len());
    }
    for j in sol.indices_labelled(Region::Corner) {
        println!("  E = {:+.3e}, corner weight {:.4}", sol.energies[j], sol.weights[j].corner);
    }

    let dist = spatial_distribution(&sol, zero_energy_window(&sol, 0.0));
    println!("zero-energy window holds {} states; density map:", dist.state_count);
    for y in 0..dist.grid.height {
        let row: Vec<String> = (0..dist.grid.width)
            .map(|x| format!("{:.2}", dist.site_density[dist.grid.index(x, y)]))
            .collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
