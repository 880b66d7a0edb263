use std::sync::Arc;

use fcm_core::llm::UreqTransport;

fn main() {
    std::process::exit(fcm_cli::run(std::env::args_os(), Arc::new(UreqTransport)));
}
