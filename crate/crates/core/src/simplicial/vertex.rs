use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Identity of block `block` on chain `chain`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockRef {
    pub chain: usize,
    pub block: u64,
}

impl BlockRef {
    pub fn new(chain: usize, block: u64) -> Self {
        Self { chain, block }
    }
}

impl fmt::Display for BlockRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}^{}", self.chain, self.block)
    }
}

/// Local transaction state attached to a vertex.
///
/// `Zero` is "not committed" (or aborted on the output side), `One` is
/// "committed", and `Bottom` marks a block whose branch lost a fork race.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Zero,
    One,
    Bottom,
}

impl Value {
    pub const ALL: [Value; 3] = [Value::Zero, Value::One, Value::Bottom];

    pub fn as_str(self) -> &'static str {
        match self {
            Value::Zero => "0",
            Value::One => "1",
            Value::Bottom => "bot",
        }
    }

    pub fn parse(s: &str) -> Option<Value> {
        match s {
            "0" => Some(Value::Zero),
            "1" => Some(Value::One),
            "bot" | "⊥" => Some(Value::Bottom),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bottom => f.write_str("⊥"),
            v => f.write_str(v.as_str()),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        Value::parse(&raw).ok_or_else(|| D::Error::custom(format!("unknown value {raw:?}")))
    }
}

/// A labeled 0-simplex. Colored vertices carry a block identity, colorless
/// ones carry only the value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub block: Option<BlockRef>,
    pub value: Value,
}

impl Vertex {
    pub fn colored(chain: usize, block: u64, value: Value) -> Self {
        Self {
            block: Some(BlockRef::new(chain, block)),
            value,
        }
    }

    pub fn colorless(value: Value) -> Self {
        Self { block: None, value }
    }

    pub fn is_colored(&self) -> bool {
        self.block.is_some()
    }

    /// Drops the block identity, keeping the value.
    pub fn project(&self) -> Vertex {
        Vertex::colorless(self.value)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.block {
            Some(b) => write!(f, "({b}, {})", self.value),
            None => write!(f, "({})", self.value),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct VertexRepr {
    chain: Option<usize>,
    block: Option<u64>,
    value: Value,
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        VertexRepr {
            chain: self.block.map(|b| b.chain),
            block: self.block.map(|b| b.block),
            value: self.value,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vertex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = VertexRepr::deserialize(d)?;
        let block = match (repr.chain, repr.block) {
            (Some(chain), Some(block)) => Some(BlockRef { chain, block }),
            (None, None) => None,
            _ => {
                return Err(D::Error::custom(
                    "vertex must set both chain and block, or neither",
                ))
            }
        };
        Ok(Vertex {
            block,
            value: repr.value,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape_is_fixed() {
        let v = Vertex::colored(1, 0, Value::Bottom);
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"chain":1,"block":0,"value":"bot"}"#
        );
        let c = Vertex::colorless(Value::One);
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"chain":null,"block":null,"value":"1"}"#
        );
        let back: Vertex = serde_json::from_str(r#"{"chain":1,"block":0,"value":"bot"}"#).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn half_labeled_vertex_is_rejected() {
        let r: Result<Vertex, _> = serde_json::from_str(r#"{"chain":1,"block":null,"value":"0"}"#);
        assert!(r.is_err());
        let r: Result<Vertex, _> = serde_json::from_str(r#"{"chain":null,"block":null,"value":"2"}"#);
        assert!(r.is_err());
    }

    #[test]
    fn ordering_is_block_then_value() {
        let mut vs = vec![
            Vertex::colored(1, 0, Value::Zero),
            Vertex::colored(0, 0, Value::Bottom),
            Vertex::colorless(Value::One),
            Vertex::colored(0, 0, Value::Zero),
        ];
        vs.sort();
        assert_eq!(
            vs,
            vec![
                Vertex::colorless(Value::One),
                Vertex::colored(0, 0, Value::Zero),
                Vertex::colored(0, 0, Value::Bottom),
                Vertex::colored(1, 0, Value::Zero),
            ]
        );
    }
}
