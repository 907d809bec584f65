//! Designs shipped with the binary.

const BUILTIN: &[(&str, &str)] = &[
    ("binary_roy", include_str!("../../../designs/binary_roy.json")),
    ("binary_roy_instrument", include_str!("../../../designs/binary_roy_instrument.json")),
    ("copula_roy", include_str!("../../../designs/copula_roy.json")),
    ("discrete_grid", include_str!("../../../designs/discrete_grid.json")),
    ("generalized_k6", include_str!("../../../designs/generalized_k6.json")),
    ("wages_lognormal", include_str!("../../../designs/wages_lognormal.json")),
];

pub fn builtin(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}
