//! Build a moving-array geometry and inspect the virtual aperture it sweeps.
//!
//! Run with: cargo run --release -p fadoa --example virtual_array

use fadoa::geometry::{
    build_virtual_array, steering_vector, AnglePair, ArrayGeometry, Trajectory, TrajectoryAxis,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fadoa::Result<()> {
    // 8-element half-wavelength line array on the y axis.
    let geom = ArrayGeometry::ula_y(8, 0.5)?;

    // 24 coordinated moves along x, each step uniform in [0.15, 0.45]
    // wavelengths.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let traj = Trajectory::random(&mut rng, 24, 0.15, 0.45, TrajectoryAxis::X)?;

    let virt = build_virtual_array(&geom, &traj);
    println!(
        "{} elements x {} positions -> {} virtual elements",
        virt.n_elements(),
        virt.n_positions(),
        virt.len()
    );
    let (mut x_max, mut y_max) = (0.0f64, 0.0f64);
    for &(x, y) in virt.coords() {
        x_max = x_max.max(x);
        y_max = y_max.max(y);
    }
    println!("aperture bounding box: {x_max:.2} x {y_max:.2} wavelengths");

    // A few virtual coordinates with their (element, position) origins.
    for idx in [0, 1, 8, 9, virt.len() - 1] {
        let (n, k) = virt.element_position(idx);
        let (x, y) = virt.coords()[idx];
        println!("virtual element {idx:>3} = element {n}, position {k:>2} at ({x:.3}, {y:.3})");
    }

    // Steering entries all have unit modulus.
    let angle = AnglePair::from_degrees(30.0, -20.0)?;
    let a = steering_vector(virt.coords(), angle);
    let worst = a.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0f64, f64::max);
    println!(
        "steering vector at (30, -20) deg: {} entries, max |modulus - 1| = {worst:.2e}",
        a.len()
    );
    Ok(())
}
