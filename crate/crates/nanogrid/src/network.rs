//! Resistive network description of the nanogrid: buses, branches with
//! temperature-dependent conductor resistance, and the nodal conductance
//! matrix.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("unknown bus '{0}'")]
    UnknownBus(String),
    #[error("branch from '{0}' to itself")]
    SelfLoop(String),
    #[error("network is not connected (bus '{0}' unreachable)")]
    Disconnected(String),
    #[error("network has no buses")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Source,
    Load,
    Junction,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    pub kind: BusKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Branch {
    pub from: String,
    pub to: String,
    pub length_m: f64,
}

/// Conductor data: DC resistance per km and its linear thermal correction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Conductor {
    pub r_per_km: f64,
    pub alpha_r: f64,
    pub ref_temp: f64,
}

impl Default for Conductor {
    /// 35 mm² XLPE-insulated aluminum cable.
    fn default() -> Self {
        Conductor {
            r_per_km: 0.8037,
            alpha_r: 0.00403,
            ref_temp: 20.0,
        }
    }
}

/// Round-trip (two-conductor) resistance of a branch at the given conductor
/// temperature.
pub fn branch_resistance(length_m: f64, conductor: &Conductor, temp: f64) -> f64 {
    assert!(length_m > 0.0, "branch length must be positive");
    let length_km = length_m / 1000.0;
    2.0 * (length_km * conductor.r_per_km + conductor.alpha_r * (temp - conductor.ref_temp))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Network {
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub conductor: Conductor,
    /// Device id -> bus id.
    pub attachments: BTreeMap<String, String>,
}

impl Network {
    pub fn bus_index(&self, id: &str) -> Result<usize, NetworkError> {
        self.buses
            .iter()
            .position(|b| b.id == id)
            .ok_or_else(|| NetworkError::UnknownBus(id.to_string()))
    }

    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    /// Branch endpoints as bus indices, in declaration order.
    pub fn branch_indices(&self) -> Result<Vec<(usize, usize)>, NetworkError> {
        self.branches
            .iter()
            .map(|br| {
                let a = self.bus_index(&br.from)?;
                let b = self.bus_index(&br.to)?;
                if a == b {
                    return Err(NetworkError::SelfLoop(br.from.clone()));
                }
                Ok((a, b))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        if self.buses.is_empty() {
            return Err(NetworkError::Empty);
        }
        let edges = self.branch_indices()?;
        // Reachability from bus 0.
        let n = self.n_buses();
        let mut seen = vec![false; n];
        let mut stack = vec![0_usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &(a, b) in &edges {
                let next = if a == i {
                    b
                } else if b == i {
                    a
                } else {
                    continue;
                };
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(NetworkError::Disconnected(self.buses[k].id.clone()));
        }
        for bus in self.attachments.values() {
            self.bus_index(bus)?;
        }
        Ok(())
    }

    /// Branch resistances at the given conductor temperature, in declaration
    /// order.
    pub fn branch_resistances(&self, temp: f64) -> Vec<f64> {
        self.branches
            .iter()
            .map(|br| branch_resistance(br.length_m, &self.conductor, temp))
            .collect()
    }

    /// Standard nodal conductance matrix: off-diagonals are negated branch
    /// conductances, diagonals the sum of incident conductances. Symmetric
    /// with zero row sums.
    pub fn conductance_matrix(&self, temp: f64) -> Result<DMatrix<f64>, NetworkError> {
        self.validate()?;
        let n = self.n_buses();
        let edges = self.branch_indices()?;
        let resistances = self.branch_resistances(temp);
        let mut g = DMatrix::zeros(n, n);
        for (&(a, b), &r) in edges.iter().zip(&resistances) {
            let y = 1.0 / r;
            g[(a, a)] += y;
            g[(b, b)] += y;
            g[(a, b)] -= y;
            g[(b, a)] -= y;
        }
        Ok(g)
    }

    /// The 12-bus laboratory ring: six ring nodes, each with one spur to an
    /// equipment connection point. Generation/storage systems attach at N1,
    /// N6 and N7 and load banks at N2, N3 and N11.
    pub fn dcdn_12bus() -> Self {
        let bus = |id: &str, kind: BusKind| Bus {
            id: id.to_string(),
            kind,
        };
        let branch = |from: &str, to: &str, length_m: f64| Branch {
            from: from.to_string(),
            to: to.to_string(),
            length_m,
        };
        let mut attachments = BTreeMap::new();
        attachments.insert("gss1".to_string(), "N1".to_string());
        attachments.insert("gss2".to_string(), "N6".to_string());
        attachments.insert("gss3".to_string(), "N7".to_string());
        attachments.insert("lb1".to_string(), "N2".to_string());
        attachments.insert("lb2".to_string(), "N3".to_string());
        attachments.insert("lb3".to_string(), "N11".to_string());
        Network {
            buses: vec![
                bus("N1", BusKind::Source),
                bus("N2", BusKind::Load),
                bus("N3", BusKind::Load),
                bus("N4", BusKind::Junction),
                bus("N5", BusKind::Junction),
                bus("N6", BusKind::Source),
                bus("N7", BusKind::Source),
                bus("N8", BusKind::Junction),
                bus("N9", BusKind::Junction),
                bus("N10", BusKind::Junction),
                bus("N11", BusKind::Load),
                bus("N12", BusKind::Junction),
            ],
            branches: vec![
                branch("N1", "N5", 6.00),
                branch("N5", "N12", 11.35),
                branch("N5", "N8", 11.25),
                branch("N12", "N4", 11.35),
                branch("N12", "N6", 17.35),
                branch("N4", "N2", 28.70),
                branch("N4", "N10", 9.65),
                branch("N8", "N7", 17.25),
                branch("N8", "N9", 11.25),
                branch("N10", "N11", 38.35),
                branch("N9", "N3", 28.50),
                branch("N9", "N10", 9.65),
            ],
            conductor: Conductor::default(),
            attachments,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn branch_resistance_reproduces_published_values() {
        let c = Conductor::default();
        assert!((branch_resistance(6.00, &c, 30.0) - 0.0902).abs() < 1e-4);
        assert!((branch_resistance(28.70, &c, 30.0) - 0.1267).abs() < 1e-4);
    }

    #[test]
    fn branch_resistance_at_reference_temp() {
        let c = Conductor::default();
        for length in [1.0, 9.65, 38.35, 250.0] {
            assert_relative_eq!(
                branch_resistance(length, &c, 20.0),
                2.0 * length / 1000.0 * 0.8037,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn two_bus_conductance_matrix() {
        let net = Network {
            buses: vec![
                Bus {
                    id: "a".into(),
                    kind: BusKind::Source,
                },
                Bus {
                    id: "b".into(),
                    kind: BusKind::Load,
                },
            ],
            branches: vec![Branch {
                from: "a".into(),
                to: "b".into(),
                length_m: 1000.0,
            }],
            conductor: Conductor {
                r_per_km: 0.5,
                alpha_r: 0.0,
                ref_temp: 20.0,
            },
            attachments: BTreeMap::new(),
        };
        let g = net.conductance_matrix(20.0).unwrap();
        let y = 1.0 / 1.0; // 2 * (1 km * 0.5)
        assert_relative_eq!(g[(0, 0)], y);
        assert_relative_eq!(g[(0, 1)], -y);
        assert_relative_eq!(g[(1, 0)], -y);
        assert_relative_eq!(g[(1, 1)], y);
    }

    #[test]
    fn chain_diagonal_sums_branch_conductances() {
        // Three buses in a chain with 0.1 ohm branches: the middle diagonal
        // must be 20 S (sum of the two incident conductances).
        let mk = |id: &str| Bus {
            id: id.into(),
            kind: BusKind::Junction,
        };
        let net = Network {
            buses: vec![mk("1"), mk("2"), mk("3")],
            branches: vec![
                Branch {
                    from: "1".into(),
                    to: "2".into(),
                    length_m: 62.212,
                },
                Branch {
                    from: "2".into(),
                    to: "3".into(),
                    length_m: 62.212,
                },
            ],
            conductor: Conductor {
                r_per_km: 0.8037,
                alpha_r: 0.0,
                ref_temp: 20.0,
            },
            attachments: BTreeMap::new(),
        };
        // 2 * 0.062212 km * 0.8037 ohm/km = 0.1 ohm
        let g = net.conductance_matrix(20.0).unwrap();
        assert_relative_eq!(g[(1, 1)], 20.0, max_relative = 1e-4);
    }

    #[test]
    fn dcdn_matrix_is_symmetric_with_zero_row_sums() {
        let net = Network::dcdn_12bus();
        let g = net.conductance_matrix(30.0).unwrap();
        assert_eq!(g.nrows(), 12);
        for r in 0..12 {
            assert!(g.row(r).sum().abs() < 1e-12, "row {r} sum");
            for c in 0..12 {
                assert_relative_eq!(g[(r, c)], g[(c, r)], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn disconnected_network_is_rejected() {
        let mk = |id: &str| Bus {
            id: id.into(),
            kind: BusKind::Junction,
        };
        let net = Network {
            buses: vec![mk("a"), mk("b"), mk("c")],
            branches: vec![Branch {
                from: "a".into(),
                to: "b".into(),
                length_m: 10.0,
            }],
            conductor: Conductor::default(),
            attachments: BTreeMap::new(),
        };
        assert!(matches!(
            net.conductance_matrix(20.0),
            Err(NetworkError::Disconnected(_))
        ));
    }
}
