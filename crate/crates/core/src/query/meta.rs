//! The metanetwork: all network applications of one query, with
//! sequentially assigned input and output variables.

use std::fmt;

use super::QueryError;
use crate::expr::Expr;
use crate::network::NetworkContext;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Application {
    pub network: String,
    pub inputs: usize,
    pub outputs: usize,
    pub input_offset: usize,
    pub output_offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MetaNetwork {
    pub applications: Vec<Application>,
    pub total_inputs: usize,
    pub total_outputs: usize,
}

impl MetaNetwork {
    /// Appends an application and assigns it the next block of variables.
    pub fn push(&mut self, network: &str, inputs: usize, outputs: usize) -> &Application {
        self.applications.push(Application {
            network: network.to_string(),
            inputs,
            outputs,
            input_offset: self.total_inputs,
            output_offset: self.total_outputs,
        });
        self.total_inputs += inputs;
        self.total_outputs += outputs;
        self.applications.last().unwrap()
    }

    /// Distinct networks in first-use order.
    pub fn networks(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for app in &self.applications {
            if !out.contains(&app.network.as_str()) {
                out.push(&app.network);
            }
        }
        out
    }
}

impl fmt::Display for MetaNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, app) in self.applications.iter().enumerate() {
            let range = |start: usize, len: usize, prefix: char| {
                if len == 1 {
                    format!("{prefix}{start}")
                } else {
                    format!("{prefix}{start}..{prefix}{}", start + len - 1)
                }
            };
            writeln!(
                f,
                "  application {}: {} inputs {} outputs {}",
                i + 1,
                app.network,
                range(app.input_offset, app.inputs, 'x'),
                range(app.output_offset, app.outputs, 'y'),
            )?;
        }
        Ok(())
    }
}

/// Lists the let-bound applications of a CSE'd query in binding order.
pub fn build_meta_network(query: &Expr, ctx: &NetworkContext) -> Result<MetaNetwork, QueryError> {
    let mut meta = MetaNetwork::default();
    let mut current = query;
    while let Expr::Quant(_, _, body) = current {
        current = body;
    }
    while let Expr::Let(_, bound, body) = current {
        let Expr::NetworkApp(name, _) = &**bound else {
            return Err(QueryError::UnsupportedAtom(bound.to_string()));
        };
        let entry = ctx.get(name).ok_or_else(|| QueryError::UnknownNetwork(name.clone()))?;
        meta.push(name, entry.input_size(), entry.output_size());
        current = body;
    }
    Ok(meta)
}
