pub mod chambers;
pub mod cones;
pub mod exactq;
pub mod fiberdiag;
pub mod mckay;
pub mod rootsys;
pub mod toricfan;

pub mod jsonutil {
    //! Canonical JSON: objects with keys sorted, no trailing whitespace.
    //! Used by the CLI so identical inputs give byte-identical output.

    use serde_json::Value;

    fn sort(v: Value) -> Value {
        match v {
            Value::Object(m) => {
                let mut entries: Vec<(String, Value)> =
                    m.into_iter().map(|(k, x)| (k, sort(x))).collect();
                entries.sort_by(|a, b| a.0.cmp(&b.0));
                Value::Object(entries.into_iter().collect())
            }
            Value::Array(a) => Value::Array(a.into_iter().map(sort).collect()),
            other => other,
        }
    }

    pub fn canonical<T: serde::Serialize>(value: &T) -> String {
        let v = serde_json::to_value(value).expect("serialize");
        serde_json::to_string_pretty(&sort(v)).expect("stringify")
    }
}
