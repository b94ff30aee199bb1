//! Barcode construction: RS block coding, PAM-M modulation and grid layout.

mod codec;
mod grid;
mod io;
mod modulation;
mod spec;

pub use codec::{rs_decode, rs_encode, SourceCodec};
pub use grid::{assemble_grid, disassemble_grid, layout_roles, GridLayout, ModuleGrid, Role};
pub use io::{read_grid, read_pgm, write_grid, write_pgm, GridMetadata};
pub use modulation::{demodulate, demodulate_value, modulate, SymbolStream};
pub use spec::{BarcodeSpec, BitMap};

/// Layout seed used when none is given.
pub const DEFAULT_LAYOUT_SEED: u64 = 0x4c43_4143;
