use anyhow::{Context, Result};
use serde_json::{Map, Value};
use tblim::core_model::ModelParams;
use tblim::operators::{heun_tb, leonard_pair, projector_band, projector_time, tb_operator, DenseOperator};

use crate::output::{basis_name, cell, matrix_from_json, matrix_json, Table};
use crate::verify::matrix_gap;

/// The operators written by `build`, keyed as in the output file.
pub struct Operators {
    pub q: DenseOperator,
    pub q_momentum: DenseOperator,
    pub t: DenseOperator,
    pub t_momentum: DenseOperator,
    pub a: DenseOperator,
    pub a_star: DenseOperator,
    pub pi1: DenseOperator,
    pub pi2: DenseOperator,
}

impl Operators {
    pub fn build(p: &ModelParams) -> Result<Self> {
        let q = tb_operator(p);
        let t = heun_tb(p).to_dense();
        let (a, a_star) = leonard_pair(p);
        Ok(Operators {
            q_momentum: q.to_momentum(p)?,
            t_momentum: t.to_momentum(p)?,
            q,
            t,
            a: a.to_dense(),
            a_star: a_star.to_dense(),
            pi1: projector_time(p),
            pi2: projector_band(p),
        })
    }

    fn named(&self) -> [(&'static str, &DenseOperator); 8] {
        [
            ("Q", &self.q),
            ("Q_momentum", &self.q_momentum),
            ("T", &self.t),
            ("T_momentum", &self.t_momentum),
            ("A", &self.a),
            ("A_star", &self.a_star),
            ("pi1", &self.pi1),
            ("pi2", &self.pi2),
        ]
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (name, op) in self.named() {
            map.insert(name.to_string(), matrix_json(op));
        }
        Value::Object(map)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let get = |name: &str| -> Result<DenseOperator> {
            matrix_from_json(v.get(name).with_context(|| format!("operator {name} missing"))?)
                .with_context(|| format!("operator {name}"))
        };
        Ok(Operators {
            q: get("Q")?,
            q_momentum: get("Q_momentum")?,
            t: get("T")?,
            t_momentum: get("T_momentum")?,
            a: get("A")?,
            a_star: get("A_star")?,
            pi1: get("pi1")?,
            pi2: get("pi2")?,
        })
    }

    /// Largest entry difference over all operators.
    pub fn max_difference(&self, other: &Operators) -> Result<f64> {
        Ok(self
            .named()
            .iter()
            .zip(other.named())
            .map(|((_, a), (_, b))| matrix_gap(a, b))
            .fold(0.0, f64::max))
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["operator", "basis", "row", "col", "re", "im"]);
        for (name, op) in self.named() {
            let m = op.matrix();
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    t.push(vec![
                        name.to_string(),
                        basis_name(op.basis()).to_string(),
                        i.to_string(),
                        j.to_string(),
                        cell(m[(i, j)].re),
                        cell(m[(i, j)].im),
                    ]);
                }
            }
        }
        t
    }
}
