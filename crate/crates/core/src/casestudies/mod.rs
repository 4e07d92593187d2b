//! Bundled case studies: commitment, WireGuard record layer, toy universe.

pub mod commitment;
pub mod models;
pub mod toy;
pub mod wireguard;

#[cfg(test)]
mod tests {
    use super::models::*;
    use crate::lang::{parse_program, print_program, validate};

    #[test]
    fn bundled_models_parse() {
        for (p, _) in BUNDLED {
            let prog = match parse(p) {
                Ok(x) => x,
                Err(e) => panic!("{p}: {e}"),
            };
            let printed = print_program(&prog);
            assert_eq!(parse_program(&printed).unwrap(), prog, "{p}");
            for d in validate(&prog) {
                eprintln!("{}", d.render(p));
            }
        }
    }
}
