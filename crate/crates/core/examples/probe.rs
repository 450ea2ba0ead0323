use oam_sim_core::field::{lg_mode, GridSpec, LgSpec};

fn main() {
    let grid = GridSpec::<f64>::standard();
    let g = lg_mode(&LgSpec::new(0, 0, 1.0), &grid).unwrap();
    println!("power lg0 = {}", g.power());
    let s = g.azimuthal_spectrum(3);
    println!("spectrum lg0 = {s:?}");
    println!("sum = {}", s.iter().sum::<f64>());

    let v = lg_mode(&LgSpec::new(1, 0, 1.0), &grid).unwrap();
    let sv = v.azimuthal_spectrum(3);
    println!("spectrum lg1 = {sv:?}");

    let masked = g.apply_spp_mask(1, 0.0, 0.0);
    let sm = masked.azimuthal_spectrum(3);
    println!("spectrum masked lg0 = {sm:?}");
    let ov = v.overlap(&masked).unwrap();
    println!(
        "overlap = {} want {}",
        ov.norm(),
        std::f64::consts::PI.sqrt() / 2.0
    );

    // interpolation sanity: exact vs interpolated at a few points
    for (x, y) in [(0.3, 0.2), (1.0, -0.7), (2.5, 1.1)] {
        let exact = (2.0 / std::f64::consts::PI).sqrt() * (-(x * x + y * y) as f64).exp();
        let interp = g.value_at(x, y).re;
        println!("({x},{y}): exact {exact} interp {interp} diff {}", (exact - interp).abs());
    }
}
