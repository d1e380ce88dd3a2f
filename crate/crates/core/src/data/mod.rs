//! Ingestion and gridded-data primitives.

mod blocks;
mod climatology;
mod coords;
mod csv;
mod dataset;
mod grid;
mod neighbors;

pub use blocks::{extract_blocks, Block, WindowView, WINDOW};
pub use climatology::{anomalies_from_sst, compute_monthly_climatology, ClimatologyTable};
pub use coords::{parse_coordinate_csv, serialize_coordinate_csv, CoordinateTable, Lattice, Location};
pub use csv::{format_value, parse_value_csv, serialize_value_csv};
pub use dataset::{Dataset, ObservedSource};
pub use grid::{TimeGrid, Variable};
pub use neighbors::{build_neighbor_map, NeighborMap};
