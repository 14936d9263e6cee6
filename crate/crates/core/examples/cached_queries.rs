//! Repeated path-loss queries with and without the LRU cache.
//!
//!     cargo run --release --example cached_queries

use std::time::Instant;

use pmlpl::channel::{ModelConfig, DEFAULT_CAPACITY, DEFAULT_QUANTUM_M};
use pmlpl::cli::scenario::read_pairs;
use pmlpl::cli::selftest::default_data_dir;

const QUERIES: usize = 200_000;

fn main() -> pmlpl::Result<()> {
    let data = default_data_dir();
    let pairs = read_pairs(&data.join("example-dataset.csv"))?;
    let cfg = ModelConfig::load(data.join("model-pmlpl.json"))?;

    let mut outputs = Vec::new();
    for capacity in [0, DEFAULT_CAPACITY] {
        let mut model = cfg.build()?;
        model.cache_configure(capacity, DEFAULT_QUANTUM_M)?;
        let start = Instant::now();
        let out: Vec<f64> = (0..QUERIES)
            .map(|i| model.total_loss(&pairs[i % pairs.len()]))
            .collect::<pmlpl::Result<_>>()?;
        let st = model.cache_stats();
        println!(
            "capacity {capacity:>6}: {:.3} s, {} hits, {} regressor evaluations",
            start.elapsed().as_secs_f64(),
            st.hits,
            st.evaluations
        );
        outputs.push(out);
    }
    assert_eq!(outputs[0], outputs[1]);
    println!("outputs identical with and without the cache");
    Ok(())
}
