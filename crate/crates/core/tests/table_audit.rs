//! Exhaustive audit of the shipped cost tables.

use ccwb_core::{get_architecture, ArchId, Architecture, Cost, CostTables, Family, Reg, Side};

fn arch(id: ArchId) -> Architecture {
    get_architecture(id, false)
}

/// Upper bound on free 16-bit registers any plan can report.
fn free_bound(a: &Architecture) -> u64 {
    a.allocatable_16bit().len() as u64
}

#[test]
fn every_primitive_has_a_row() {
    for id in ArchId::ALL {
        let a = arch(id);
        let t = &a.cost_tables;
        assert_eq!(t.arch, id);
        for r in &a.registers {
            assert!(t.load.contains_key(&(r.reg, r.width)), "{id}: load {}", r.reg);
            assert!(t.access_reg.contains_key(&(r.reg, r.width)), "{id}: access_reg {}", r.reg);
        }
        for w in [8, 16, 32] {
            assert!(t.access_stack.contains_key(&w), "{id}: access_stack {w}");
        }
        for key in [(8, 8), (16, 16), (32, 32)] {
            assert!(t.push.contains_key(&key), "{id}: push {key:?}");
        }
        if a.push_granularity == 16 {
            assert!(t.push.contains_key(&(16, 8)), "{id}: push 16 8");
            assert!(t.push_pair.is_some(), "{id}: push_pair");
        }
        for side in [Side::Caller, Side::Callee] {
            for bytes in 1..=255 {
                for free in 0..=free_bound(&a) {
                    assert!(t.sp_adjust(side, bytes, free).is_some(), "{id}: sp_adjust {side} {bytes} {free}");
                }
            }
        }
    }
}

#[test]
fn stm8_prefixed_y_operations_cost_one_more_byte() {
    let t = arch(ArchId::Stm8).cost_tables;
    for (x, y) in [(Reg::Xl, Reg::Yl), (Reg::Xh, Reg::Yh)] {
        assert_eq!(t.load[&(y, 8)].bytes, t.load[&(x, 8)].bytes + 1);
        assert_eq!(t.access_reg[&(y, 8)].bytes, t.access_reg[&(x, 8)].bytes + 1);
    }
    // a y parameter has to be moved to x first
    assert_eq!(t.access_reg[&(Reg::Y, 16)].bytes, t.access_reg[&(Reg::X, 16)].bytes + 1);
}

#[test]
fn z80_family_byte_pushes_cost_more_code() {
    for id in ArchId::ALL.into_iter().filter(|id| id.is_z80_family()) {
        let t = arch(id).cost_tables;
        assert!(t.push[&(8, 8)].bytes > t.push[&(16, 8)].bytes, "{id}");
        let pair = t.push_pair.unwrap();
        let single = t.push[&(8, 8)];
        assert!(pair.bytes <= 2 * single.bytes && pair.cycles <= 2 * single.cycles, "{id}");
    }
}

#[test]
fn sm83_cleanup_ignores_free_registers() {
    let a = arch(ArchId::Sm83);
    for side in [Side::Caller, Side::Callee] {
        for bytes in 1..=255 {
            let first = a.cost_tables.sp_adjust(side, bytes, 0);
            for free in 1..=free_bound(&a) {
                assert_eq!(a.cost_tables.sp_adjust(side, bytes, free), first, "{side} {bytes} {free}");
            }
        }
    }
}

#[test]
fn cleanup_never_gets_dearer_with_more_free_registers() {
    for id in ArchId::ALL.into_iter().filter(|id| id.family() != Family::Sm83) {
        let a = arch(id);
        for side in [Side::Caller, Side::Callee] {
            for bytes in 1..=255 {
                for free in 0..free_bound(&a) {
                    let (now, more) = (
                        a.cost_tables.sp_adjust(side, bytes, free).unwrap(),
                        a.cost_tables.sp_adjust(side, bytes, free + 1).unwrap(),
                    );
                    // rows minimise bytes first, so a spare register may
                    // trade a cycle for a byte but never costs more code
                    assert!(
                        (more.bytes, more.cycles) <= (now.bytes, now.cycles),
                        "{id} {side} {bytes}: {now} with {free} free, {more} with one more"
                    );
                }
            }
        }
    }
}

#[test]
fn caller_cleanup_is_never_slower() {
    for id in ArchId::ALL {
        let a = arch(id);
        for bytes in 1..=255 {
            for free in 0..=free_bound(&a) {
                let caller = a.cost_tables.sp_adjust(Side::Caller, bytes, free).unwrap();
                let callee = a.cost_tables.sp_adjust(Side::Callee, bytes, free).unwrap();
                assert!(caller.cycles <= callee.cycles, "{id} {bytes} {free}: {caller} vs {callee}");
                // once per definition against once per call site: two call sites pay for it
                assert!(callee.bytes <= 2 * caller.bytes, "{id} {bytes} {free}: {caller} vs {callee}");
            }
        }
    }
}

fn bytes_only(t: &CostTables) -> Vec<u64> {
    let mut v = vec![t.call.bytes, t.ret.bytes];
    v.extend(t.load.values().map(|c| c.bytes));
    v.extend(t.push.values().map(|c| c.bytes));
    v.extend(t.push_pair.map(|c| c.bytes));
    v.extend(t.access_reg.values().map(|c| c.bytes));
    v.extend(t.access_stack.values().map(|c| c.bytes));
    for side in [Side::Caller, Side::Callee] {
        for bytes in 1..=255 {
            for free in 0..=t.max_free() {
                v.extend(t.sp_adjust(side, bytes, free).map(|c| c.bytes));
            }
        }
    }
    v
}

#[test]
fn variants_share_their_family_byte_table() {
    let z80 = bytes_only(&CostTables::builtin(ArchId::Z80));
    for id in [ArchId::Z180, ArchId::Z80n] {
        assert_eq!(bytes_only(&CostTables::builtin(id)), z80, "{id}");
    }
    let r3ka = CostTables::builtin(ArchId::R3ka);
    for id in [ArchId::R2k, ArchId::R2ka, ArchId::Tlcs90] {
        assert_eq!(bytes_only(&CostTables::builtin(id)), bytes_only(&r3ka), "{id}");
    }
    // the eZ80 adds entries for its split index registers; the rest match
    let ez = CostTables::builtin(ArchId::Ez80);
    for (k, c) in &r3ka.load {
        assert_eq!(ez.load[k].bytes, c.bytes, "ez80 load {k:?}");
    }
    for (k, c) in &r3ka.push {
        assert_eq!(ez.push[k].bytes, c.bytes, "ez80 push {k:?}");
    }
}

#[test]
fn hand_assembled_entries() {
    // STM8: ldw x,(n,sp) = 1E nn (2 bytes, 2 cycles); pushw x = 89 (1, 2);
    // call nn = CD nn nn (3, 4); addw sp,#n = 5B nn (2, 2)
    let s = CostTables::builtin(ArchId::Stm8);
    assert_eq!(s.push[&(16, 16)], Cost::new(2 + 1, 2 + 2));
    assert_eq!(s.call, Cost::new(3, 4));
    assert_eq!(s.sp_adjust(Side::Caller, 2, 0), Some(Cost::new(2, 2)));
    // Z80: ld r,(ix+d) = DD 46+ dd (3 bytes, 19 T); call nn (3, 17); ret (1, 10)
    let z = CostTables::builtin(ArchId::Z80);
    assert_eq!(z.load[&(Reg::A, 8)], Cost::new(3, 19));
    assert_eq!(z.load[&(Reg::Hl, 16)], Cost::new(6, 38));
    assert_eq!(z.call, Cost::new(3, 17));
    assert_eq!(z.ret, Cost::new(1, 10));
    // pop rr = 1 byte 10 T; inc sp = 1 byte 6 T
    assert_eq!(z.sp_adjust(Side::Caller, 3, 1), Some(Cost::new(1 + 1, 10 + 6)));
    // SM83: add sp,#e = E8 ee (2 bytes, 16 clocks)
    let g = CostTables::builtin(ArchId::Sm83);
    assert_eq!(g.sp_adjust(Side::Caller, 2, 0), Some(Cost::new(2, 16)));
}

#[test]
fn shipped_tables_survive_print_and_parse() {
    for id in ArchId::ALL {
        let t = CostTables::builtin(id);
        assert_eq!(CostTables::parse(&t.print()).unwrap(), t, "{id}");
    }
}
