use gasdyn::presets::{preset, PresetConfig, PresetName};
use gasdyn::verification::{convergence_driver, NormOrder};

fn main() {
    for name in [PresetName::SmoothWaveIdeal, PresetName::SmoothWaveVdw, PresetName::SmoothWaveJwl, PresetName::SmoothWaveMg] {
        let p = preset(name).unwrap();
        let PresetConfig::OneD(c) = p.config else { panic!() };
        let rows = convergence_driver(&c, &[100, 200, 400], &[NormOrder::Inf]).unwrap();
        print!("{:20}", p.name.id());
        for r in &rows {
            print!("  {:9.3e} ({})", r.delta[0], r.rates[0].map(|x| format!("{x:+.2}")).unwrap_or_default());
        }
        println!();
    }
    let p = preset(PresetName::VortexVdw).unwrap();
    let PresetConfig::TwoD(c) = p.config else { panic!() };
    let t0 = std::time::Instant::now();
    let rows = convergence_driver(&c, &[16, 32, 64], &[NormOrder::One, NormOrder::Inf]).unwrap();
    for r in &rows {
        print!("{:7} nodes", r.n_nodes);
        for (k, d) in r.delta.iter().enumerate() {
            print!("  {d:9.3e} ({})", r.rates[k].map(|x| format!("{x:+.2}")).unwrap_or_default());
        }
        println!();
    }
    println!("[vortex {:?}]", t0.elapsed());
}
