//! Bundled grammars and synthetic input generators.
//!
//! The six corpus grammars cover data parsing (CSV, syslog, JSON, XML) and
//! input validation (e-mail extraction, UTF-8 well-formedness). Inputs are
//! generated from a seed so every run sees the same bytes.

pub mod generate;

pub const CSV: &str = include_str!("../../grammars/csv.peg");
pub const LOG: &str = include_str!("../../grammars/log.peg");
pub const JSON: &str = include_str!("../../grammars/json.peg");
pub const XML: &str = include_str!("../../grammars/xml.peg");
pub const EMAIL: &str = include_str!("../../grammars/email.peg");
pub const UTF8: &str = include_str!("../../grammars/utf8.peg");

/// All corpus grammars by name.
pub const GRAMMARS: [(&str, &str); 6] = [
    ("csv", CSV),
    ("log", LOG),
    ("json", JSON),
    ("xml", XML),
    ("email", EMAIL),
    ("utf8", UTF8),
];

/// The original syslog fragment: it references `Misc` without
/// defining it, and `DATA` stops before the line break, so it does not
/// validate as-is. [`LOG`] is the completed version.
pub const SYSLOG_FRAGMENT: &str = "\
File = Log*
Log = MONTH ' '  DAY ' ' TIME ' ' HOST ' '
  PROCESS '[' PID ']' Misc ': ' DATA
DAY = [0-3 ][0-9]
MONTH = 'Jan'/'Feb'/'Mar'/'Apr'/'May'/'Jun'
  /'Jul'/'Aug'/'Sep'/'Oct'/'Nov'/'Dec'
TIME = [0-9][0-9] ':' [0-9][0-9] ':' [0-9][0-9]
HOST = (!' ' .)*
PROCESS = (!'[' .)*
PID = [0-9]+
DATA = (!('\\n' (MONTH / !.)) .)*
";

pub fn grammar(name: &str) -> Option<&'static str> {
    GRAMMARS.iter().find(|(n, _)| *n == name).map(|(_, src)| *src)
}

/// Generated input of roughly `approx_bytes` that the named grammar accepts.
pub fn sample_input(name: &str, approx_bytes: usize, seed: u64) -> Option<Vec<u8>> {
    Some(match name {
        "csv" => generate::csv_of_size(approx_bytes, seed),
        "log" => generate::syslog_of_size(approx_bytes, seed),
        "json" => generate::json_of_size(approx_bytes, seed),
        "xml" => generate::xml_of_size(approx_bytes, seed),
        "email" => generate::email_text_of_size(approx_bytes, seed),
        "utf8" => generate::utf8_text_of_size(approx_bytes, seed),
        _ => return None,
    })
}
