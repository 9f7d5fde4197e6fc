use crate::args::BenchArgs;
use crate::bench::{run_suite, write_csv, BenchConfig};
use crate::error::{io_error, Result};

pub fn run(args: &BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        suite: args.suite.clone(),
        sizes: args.sizes.clone(),
        dim: args.dim,
        extents: args.extents.clone(),
        methods: args.methods.clone(),
        params: args.params.clone(),
    };
    let rows = run_suite(&cfg)?;
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(io_error(path))?;
            write_csv(&rows, file)
        }
        None => write_csv(&rows, std::io::stdout().lock()),
    }
}
