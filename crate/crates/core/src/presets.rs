//! Built-in scenarios for the reference operating point and each figure
//! reproduction.

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        /// `(name, scenario text)` pairs.
        pub const PRESETS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../presets/", $name, ".scn")))),*
        ];
    };
}

presets!("baseline", "step", "fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c", "fig5",);

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{check_scenario, parse_scenario, serialize_scenario};

    #[test]
    fn presets_are_clean_and_canonical() {
        for (name, text) in PRESETS {
            let c = check_scenario(text);
            assert!(c.diagnostics.is_empty(), "{name}: {:?}", c.diagnostics);
            let doc = parse_scenario(text).unwrap();
            assert_eq!(&serialize_scenario(&doc), text, "{name}");
        }
    }
}
