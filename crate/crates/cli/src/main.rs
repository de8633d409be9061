use std::process::ExitCode;

fn main() -> ExitCode {
    let record_path = std::env::var_os("CANONFN_RECORD");
    let (code, report, record) = canonfn_cli::run_argv(std::env::args_os());
    if code == canonfn_cli::EXIT_ERROR {
        eprint!("{report}");
    } else {
        print!("{report}");
    }
    if let (Some(path), Some(record)) = (record_path, record) {
        if let Err(e) = std::fs::write(&path, record.to_string()) {
            eprintln!("cannot write run record: {e}");
        }
    }
    ExitCode::from(code as u8)
}
