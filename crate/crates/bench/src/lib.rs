//! Shared fixtures for the criterion benchmarks.

use pal_core::bench::{gen_mandelbrot_program, MandelbrotConfig};
use pal_core::gen::{generate_source, GenConfig};
use pal_core::il::parse_assembly;
use pal_core::Program;

/// A Mandelbrot workload small enough for many criterion samples.
pub fn small_mandelbrot(par_degree: u32) -> MandelbrotConfig {
    MandelbrotConfig::new(120, 80, 10, par_degree).with_max_iter(200)
}

pub fn mandelbrot_source(config: &MandelbrotConfig) -> String {
    gen_mandelbrot_program(config).expect("fixture config is valid")
}

pub fn mandelbrot(config: &MandelbrotConfig) -> Program {
    parse_assembly(&mandelbrot_source(config)).expect("generated program parses")
}

/// Sources of `n` generated programs, seeds `0..n`.
pub fn corpus_sources(n: u64) -> Vec<String> {
    (0..n).map(|seed| generate_source(seed, &GenConfig::default())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        let p = mandelbrot(&small_mandelbrot(2));
        assert!(pal_core::verify_parallel_constraints(&p).is_empty());
        for src in corpus_sources(4) {
            parse_assembly(&src).unwrap();
        }
    }
}
