//! Channel geometry: where each rail points and which rails line up.
//!
//! Because rails are diameters, orientation is taken modulo 180 degrees.
//! Two horizontally adjacent gears hand a sensor across exactly when both
//! their rails lie east-west (0 degrees); vertically adjacent gears need
//! both rails north-south (90 degrees). Connections repeat with the
//! rotation period.

use super::types::{GearPos, GridConfig, Slot};

/// Orientation of an aligned rail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rail {
    /// East-west, enabling transfers between horizontal neighbors.
    EastWest,
    /// North-south, enabling transfers between vertical neighbors.
    NorthSouth,
}

/// Orientation of channel `k` on `gear` at rotation offset `offset`,
/// in whole degrees within [0, 180).
///
/// Offsets outside [0, period) wrap around; geometry is periodic.
pub fn channel_angle(config: &GridConfig, gear: &GearPos, channel: u16, offset: u16) -> u16 {
    debug_assert!(config.contains(gear));
    debug_assert!(channel < config.channels());
    let base = channel as i32 * config.channel_degrees() as i32;
    let turn = (offset % config.period()) as i32 * config.slot_degrees() as i32;
    (base + gear.spin() * turn).rem_euclid(180) as u16
}

/// The rail orientation of a slot, if it is aligned with the grid axes.
pub fn rail_at(config: &GridConfig, slot: &Slot, offset: u16) -> Option<Rail> {
    match channel_angle(config, &slot.gear, slot.channel, offset) {
        0 => Some(Rail::EastWest),
        90 => Some(Rail::NorthSouth),
        _ => None,
    }
}

/// Channel index that meshes with channel `k` on any adjacent gear.
///
/// When a rail on one gear is axis-aligned, the counter-rotating neighbor's
/// aligned rail is always channel (C - k) mod C; this follows from the two
/// gears turning by opposite amounts from mirrored channel layouts.
pub fn partner_channel(config: &GridConfig, channel: u16) -> u16 {
    (config.channels() - channel) % config.channels()
}

/// The only channel a sensor that currently rides `slot` can ever occupy on
/// gear `dest`.
///
/// Every crossing lands on the partner channel, and the grid is bipartite,
/// so the channel a sensor carries on a given gear depends only on that
/// gear's row+col parity: the original index on same-parity gears, the
/// partner index on opposite-parity gears. A conservation law, not a
/// planning choice.
pub fn carried_channel(config: &GridConfig, slot: &Slot, dest: &GearPos) -> u16 {
    let flip = (slot.gear.row + slot.gear.col) % 2 != (dest.row + dest.col) % 2;
    if flip {
        partner_channel(config, slot.channel)
    } else {
        slot.channel
    }
}

/// Canonical label of a slot's conservation class. Two slots can host the
/// same sensor at different times iff their keys match: same gear parity
/// with the same channel, or opposite parity with partnered channels.
pub fn conservation_key(config: &GridConfig, slot: &Slot) -> (u8, u16) {
    let parity = ((slot.gear.row + slot.gear.col) % 2) as u8;
    let here = (parity, slot.channel);
    let across = (1 - parity, partner_channel(config, slot.channel));
    here.min(across)
}

/// An unordered pair of slots whose rails are aligned across a meshing
/// point, letting one sensor cross between the two gears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChannelPair {
    pub a: Slot,
    pub b: Slot,
}

impl ChannelPair {
    fn new(a: Slot, b: Slot) -> Self {
        // Canonical endpoint order so pair sets compare structurally.
        if a <= b {
            Self { a, b }
        } else {
            Self { a: b, b: a }
        }
    }

    pub fn other(&self, slot: &Slot) -> Option<Slot> {
        if *slot == self.a {
            Some(self.b)
        } else if *slot == self.b {
            Some(self.a)
        } else {
            None
        }
    }
}

/// Every connected slot pair at one rotation offset, sorted canonically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionSet {
    offset: u16,
    pairs: Vec<ChannelPair>,
}

impl ConnectionSet {
    pub fn offset(&self) -> u16 {
        self.offset
    }

    pub fn pairs(&self) -> &[ChannelPair] {
        &self.pairs
    }

    pub fn contains(&self, a: &Slot, b: &Slot) -> bool {
        let probe = ChannelPair::new(*a, *b);
        self.pairs.binary_search_by(|p| pair_key(p).cmp(&pair_key(&probe))).is_ok()
    }
}

fn pair_key(p: &ChannelPair) -> (Slot, Slot) {
    (p.a, p.b)
}

/// Enumerate all connections at `offset` (taken modulo the period).
///
/// Only interior meshing points count: a rail aligned toward the grid edge
/// has nothing to connect to.
pub fn connections_at(config: &GridConfig, offset: u16) -> ConnectionSet {
    let offset = offset % config.period();
    let mut pairs = Vec::new();
    for row in 0..config.rows() {
        for col in 0..config.cols() {
            let gear = GearPos::new(row, col);
            for channel in 0..config.channels() {
                let slot = Slot::new(gear, channel);
                // Emit each pair from its west/north endpoint only.
                match rail_at(config, &slot, offset) {
                    Some(Rail::EastWest) if col + 1 < config.cols() => {
                        let east = Slot::new(
                            GearPos::new(row, col + 1),
                            partner_channel(config, channel),
                        );
                        debug_assert_eq!(rail_at(config, &east, offset), Some(Rail::EastWest));
                        pairs.push(ChannelPair::new(slot, east));
                    }
                    Some(Rail::NorthSouth) if row + 1 < config.rows() => {
                        let south = Slot::new(
                            GearPos::new(row + 1, col),
                            partner_channel(config, channel),
                        );
                        debug_assert_eq!(rail_at(config, &south, offset), Some(Rail::NorthSouth));
                        pairs.push(ChannelPair::new(slot, south));
                    }
                    _ => {}
                }
            }
        }
    }
    pairs.sort_by_key(|p| pair_key(p));
    ConnectionSet { offset, pairs }
}

/// Slots directly connected to `slot` at `offset`, in canonical
/// (north, west, east, south) order. At most two: the opposite ends of one
/// aligned diameter.
pub fn connected_partners(config: &GridConfig, slot: &Slot, offset: u16) -> Vec<Slot> {
    let mut partners = Vec::with_capacity(2);
    let Some(rail) = rail_at(config, slot, offset) else {
        return partners;
    };
    let k = partner_channel(config, slot.channel);
    let GearPos { row, col } = slot.gear;
    match rail {
        Rail::NorthSouth => {
            if row > 0 {
                partners.push(Slot::new(GearPos::new(row - 1, col), k));
            }
            if row + 1 < config.rows() {
                partners.push(Slot::new(GearPos::new(row + 1, col), k));
            }
        }
        Rail::EastWest => {
            if col > 0 {
                partners.push(Slot::new(GearPos::new(row, col - 1), k));
            }
            if col + 1 < config.cols() {
                partners.push(Slot::new(GearPos::new(row, col + 1), k));
            }
        }
    }
    partners
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rows: u16, cols: u16, channels: u16) -> GridConfig {
        GridConfig::new(rows, cols, channels).unwrap()
    }

    #[test]
    fn angle_follows_spin_and_offset() {
        let c4 = cfg(2, 2, 4);
        // Positive-spin gear, channel 1, three slots of 45 degrees:
        // 45 + 135 wraps to 0.
        assert_eq!(channel_angle(&c4, &GearPos::new(0, 0), 1, 3), 0);
        assert_eq!(channel_angle(&c4, &GearPos::new(0, 0), 0, 0), 0);
        assert_eq!(channel_angle(&c4, &GearPos::new(0, 0), 2, 0), 90);

        let c1 = cfg(2, 2, 1);
        // Negative-spin gear swept one 90-degree slot: -90 wraps to 90.
        assert_eq!(channel_angle(&c1, &GearPos::new(0, 1), 0, 1), 90);
        assert_eq!(channel_angle(&c1, &GearPos::new(0, 1), 0, 0), 0);
    }

    #[test]
    fn angles_are_distinct_within_a_gear() {
        for channels in [1u16, 2, 3, 4, 5, 6, 9] {
            let config = cfg(2, 3, channels);
            for offset in 0..config.period() {
                for gear in [GearPos::new(0, 0), GearPos::new(0, 1)] {
                    let mut angles: Vec<u16> = (0..channels)
                        .map(|k| channel_angle(&config, &gear, k, offset))
                        .collect();
                    angles.sort_unstable();
                    angles.dedup();
                    assert_eq!(angles.len(), channels as usize);
                }
            }
        }
    }

    #[test]
    fn even_channel_counts_always_expose_both_rails() {
        for channels in [2u16, 4, 6] {
            let config = cfg(3, 3, channels);
            for offset in 0..config.period() {
                for row in 0..3 {
                    for col in 0..3 {
                        let gear = GearPos::new(row, col);
                        let ew = (0..channels)
                            .filter(|&k| channel_angle(&config, &gear, k, offset) == 0)
                            .count();
                        let ns = (0..channels)
                            .filter(|&k| channel_angle(&config, &gear, k, offset) == 90)
                            .count();
                        assert_eq!((ew, ns), (1, 1));
                    }
                }
            }
        }
    }

    #[test]
    fn two_by_two_single_channel_alternates_rail_direction() {
        let config = cfg(2, 2, 1);
        let horizontal = connections_at(&config, 0);
        assert_eq!(
            horizontal.pairs(),
            &[
                ChannelPair::new(
                    Slot::new(GearPos::new(0, 0), 0),
                    Slot::new(GearPos::new(0, 1), 0)
                ),
                ChannelPair::new(
                    Slot::new(GearPos::new(1, 0), 0),
                    Slot::new(GearPos::new(1, 1), 0)
                ),
            ]
        );
        let vertical = connections_at(&config, 1);
        assert_eq!(
            vertical.pairs(),
            &[
                ChannelPair::new(
                    Slot::new(GearPos::new(0, 0), 0),
                    Slot::new(GearPos::new(1, 0), 0)
                ),
                ChannelPair::new(
                    Slot::new(GearPos::new(0, 1), 0),
                    Slot::new(GearPos::new(1, 1), 0)
                ),
            ]
        );
    }

    #[test]
    fn single_gear_has_no_connections() {
        let config = cfg(1, 1, 4);
        for offset in 0..config.period() {
            assert!(connections_at(&config, offset).pairs().is_empty());
        }
    }

    #[test]
    fn connections_are_periodic() {
        for channels in [1u16, 2, 3, 4] {
            let config = cfg(3, 2, channels);
            let period = config.period();
            for offset in 0..64u16 {
                assert_eq!(
                    connections_at(&config, offset),
                    connections_at(&config, offset % period),
                );
            }
        }
    }

    #[test]
    fn partner_lookup_matches_enumeration() {
        for channels in [1u16, 2, 3, 4, 6] {
            let config = cfg(3, 4, channels);
            for offset in 0..config.period() {
                let set = connections_at(&config, offset);
                for row in 0..config.rows() {
                    for col in 0..config.cols() {
                        for k in 0..channels {
                            let slot = Slot::new(GearPos::new(row, col), k);
                            let mut from_set: Vec<Slot> = set
                                .pairs()
                                .iter()
                                .filter_map(|p| p.other(&slot))
                                .collect();
                            from_set.sort_unstable();
                            let mut direct = connected_partners(&config, &slot, offset);
                            direct.sort_unstable();
                            assert_eq!(from_set, direct, "slot {slot} offset {offset}");
                        }
                    }
                }
            }
        }
    }
}
