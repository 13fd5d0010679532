//! Zero-padded OFDM physical layer: configuration, bit mapping,
//! modulation/demodulation, frame assembly, synchronization, channel
//! estimation and the full receive chain.

pub mod config;
pub mod estimate;
pub mod frame;
pub mod mapping;
pub mod modem;
pub mod receiver;
pub mod sync;

pub use config::{Modulation, OfdmConfig};
pub use estimate::{lmmse_equalize, ls_channel_estimate, ChannelEstimate};
pub use frame::{build_frame, lfm_template, FrameLayout, Segment, SegmentKind};
pub use mapping::{deinterleave, demap_symbols, interleave, map_symbols};
pub use modem::{demodulate_block, modulate_block, pilot_symbols, DemodulatedBlock};
pub use receiver::{receive_frame, BlockDecision, FrameReception};
pub use sync::synchronize;
