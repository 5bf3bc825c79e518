#!/usr/bin/env python3
"""Writes the shipped Station A suite: suite.json, cases/*.tc, requirements.txt, links.txt.

Usage: tools/gen_suite.py [suite_dir]   (default: suite/)
The output is committed; rerun after editing the case table below.
"""

import json
import pathlib
import sys

DOORS = ["set DOOR_CLOSED_1 = 1", "set DOOR_CLOSED_2 = 1", "wait 20ms"]
SEARCH_1 = ["set SEARCH_BTN_1 = 1", "expect state ACCESS == SEARCH_1 within 50ms", "set SEARCH_BTN_1 = 0"]
SEARCH_2 = ["set SEARCH_BTN_2 = 1", "expect state ACCESS == SEARCH_2 within 50ms", "set SEARCH_BTN_2 = 0"]
SECURE = ["set SECURE_KEY = 1", "expect SECURED_LED == 1 within 50ms", "set SECURE_KEY = 0"]
BEAM = ["set BEAM_REQ = 1", "expect SHUTTER_PERMIT == 1 within 50ms"]
IN_SEARCH_1 = DOORS + SEARCH_1
IN_SEARCH_2 = IN_SEARCH_1 + SEARCH_2
SECURED = IN_SEARCH_2 + SECURE
BEAM_ON = SECURED + BEAM
OPEN_DOORS = ["set DOOR_CLOSED_1 = 0", "set DOOR_CLOSED_2 = 0"]
CLOSE_DOORS = ["set DOOR_CLOSED_1 = 1", "set DOOR_CLOSED_2 = 1"]
PRESS_RESET = ["set RESET_BTN = 1", "wait 20ms", "set RESET_BTN = 0", "wait 20ms"]


def expect_all(points, value, within=20):
    return [f"expect {p} == {value} within {within}ms" for p in points]


COMBINED = ["SHUTTER_PERMIT", "DOOR_LOCK", "WARNING_BEACON", "SECURED_LED"]
CHAIN_A = ["SHUTTER_PERMIT_A", "SEARCH_LED_A", "SECURED_LED_A", "FAULT_LED_A"]
CHAIN_B = ["SHUTTER_PERMIT_B", "SEARCH_LED_B", "SECURED_LED_B", "FAULT_LED_B"]

HIGH = [
    ("B-01", "Access sequence",
     "The station grants beam permit only after a complete search-and-secure sequence."),
    ("B-02", "Trips and interlocks",
     "Any door opening or emergency stop removes beam permit and drops the station out of secured."),
    ("B-03", "Fault handling",
     "Chain faults are detected, latched and hold the station safe until an operator reset."),
]

RUNS = [
    ("TR-01", "Reset and idle", "After reset the station is idle, fault-free and every output is off."),
    ("TR-02", "Search sequence", "The two search buttons must be pressed in order with the doors closed."),
    ("TR-03", "Secure and beam permit", "The secure key latches SECURED and a beam request then asserts permit."),
    ("TR-04", "Door trips", "Opening the doors trips the station and a reset is needed to search again."),
    ("TR-05", "E-stop trips", "Either emergency stop trips the station and latches ESTOP_LATCH on both chains."),
    ("TR-06", "Interlock permutations", "Out-of-order or partial operator actions never produce a permit."),
    ("TR-07", "Door contact discrepancy", "Disagreeing door contacts latch DISCREPANCY on both chains."),
    ("TR-08", "Single-chain faults", "A fault on one chain removes the combined outputs and lights that chain's LED."),
    ("TR-09", "Search timeout", "A search stage left open for 30 s latches SEARCH_TIMEOUT."),
]

# (title, steps, detail requirement texts); eight cases per run, in run order.
CASES = [
    # TR-01
    ("Combined outputs off after reset", expect_all(COMBINED, 0, 10),
     ["SHUTTER_PERMIT is 0 after station reset.",
      "DOOR_LOCK, WARNING_BEACON and SECURED_LED are 0 after station reset."]),
    ("Per-chain outputs off after reset", expect_all(CHAIN_A + CHAIN_B, 0, 10),
     ["Chain A outputs are 0 after station reset.",
      "Chain B outputs are 0 after station reset."]),
    ("Chains start idle and fault-free",
     ["expect fault A == NoFault within 10ms", "expect fault B == NoFault within 10ms",
      "expect state ACCESS == IDLE within 10ms"],
     ["Chain A starts with no latched fault.",
      "Chain B starts with no latched fault.",
      "The chain A access task starts in IDLE."]),
    ("Idle holds with doors closed", DOORS + ["wait 1000ms", "expect state ACCESS == IDLE within 10ms"]
     + expect_all(["WARNING_BEACON", "SEARCH_LED_B", "SECURED_LED"], 0, 10),
     ["Closing the doors alone does not start a search.",
      "The station stays idle without operator input."]),
    ("Search refused with doors open",
     ["set SEARCH_BTN_1 = 1", "wait 200ms", "expect state ACCESS == IDLE within 10ms"]
     + expect_all(["SEARCH_LED_A", "SEARCH_LED_B", "WARNING_BEACON"], 0, 10),
     ["SEARCH_BTN_1 is ignored while the doors are open.",
      "No search indication is shown while the doors are open."]),
    ("Search refused while E-stop pressed",
     DOORS + ["set ESTOP_USER = 1", "wait 20ms", "set SEARCH_BTN_1 = 1", "wait 200ms",
              "expect state ACCESS == IDLE within 10ms"]
     + expect_all(["SEARCH_LED_A", "SEARCH_LED_B"], 0, 10),
     ["SEARCH_BTN_1 is ignored while an emergency stop is pressed.",
      "Neither chain indicates a search while an emergency stop is pressed."]),
    ("Second search button alone ignored",
     DOORS + ["set SEARCH_BTN_2 = 1", "wait 200ms", "expect state ACCESS == IDLE within 10ms"]
     + expect_all(["SEARCH_LED_B", "WARNING_BEACON"], 0, 10),
     ["SEARCH_BTN_2 pressed from idle does not start a search.",
      "Chain B stays idle when SEARCH_BTN_2 is pressed from idle."]),
    ("Key and beam request ignored in idle",
     DOORS + ["set SECURE_KEY = 1", "set BEAM_REQ = 1", "wait 500ms", "expect state ACCESS == IDLE within 10ms"]
     + expect_all(["SECURED_LED", "SHUTTER_PERMIT", "DOOR_LOCK"], 0, 10),
     ["SECURE_KEY from idle does not secure the station.",
      "BEAM_REQ from idle does not assert any permit.",
      "DOOR_LOCK stays off unless the station is secured."]),
    # TR-02
    ("First search button starts the search",
     IN_SEARCH_1 + expect_all(["SEARCH_LED_A", "SEARCH_LED_B"], 1),
     ["SEARCH_BTN_1 with doors closed moves chain A to SEARCH_1.",
      "Both chains light their search LED in the first search stage."]),
    ("Warning beacon during search",
     IN_SEARCH_1 + expect_all(["WARNING_BEACON"], 1) + SEARCH_2 + expect_all(["WARNING_BEACON"], 1),
     ["WARNING_BEACON is on during the first search stage.",
      "WARNING_BEACON stays on during the second search stage."]),
    ("Second search button advances the search",
     IN_SEARCH_2 + expect_all(["SEARCH_LED_A", "SEARCH_LED_B"], 1) + expect_all(["SECURED_LED"], 0),
     ["SEARCH_BTN_2 during the first stage moves chain A to SEARCH_2.",
      "Search LEDs stay on and SECURED_LED stays off in the second stage."]),
    ("Search buttons must be pressed in order",
     DOORS + ["set SEARCH_BTN_2 = 1", "wait 50ms", "set SEARCH_BTN_2 = 0", "wait 50ms"] + SEARCH_1
     + ["wait 100ms", "expect state ACCESS == SEARCH_1 within 10ms"],
     ["An early SEARCH_BTN_2 is not remembered for the next search.",
      "SEARCH_BTN_1 after an early SEARCH_BTN_2 starts at the first stage."]),
    ("Search indication ends when secured",
     SECURED + expect_all(["SEARCH_LED_A", "SEARCH_LED_B", "WARNING_BEACON"], 0),
     ["Both search LEDs turn off once the station is secured.",
      "WARNING_BEACON turns off once the station is secured."]),
    ("Key ignored during first search stage",
     IN_SEARCH_1 + ["set SECURE_KEY = 1", "wait 200ms", "expect state ACCESS == SEARCH_1 within 10ms"]
     + expect_all(["SECURED_LED_A", "SECURED_LED_B", "SECURED_LED"], 0, 10),
     ["SECURE_KEY during the first search stage does not secure chain A.",
      "SECURE_KEY during the first search stage does not secure chain B."]),
    ("First stage holds inside the search window",
     IN_SEARCH_1 + ["wait 29000ms", "expect state ACCESS == SEARCH_1 within 10ms",
                    "expect fault A == NoFault within 10ms", "expect fault B == NoFault within 10ms"]
     + expect_all(["SEARCH_LED_B"], 1, 10),
     ["The first search stage persists for 29 s without a fault.",
      "Chain B keeps searching for 29 s without a fault."]),
    ("Second stage holds inside the search window",
     IN_SEARCH_2 + ["wait 29000ms", "expect state ACCESS == SEARCH_2 within 10ms",
                    "expect fault A == NoFault within 10ms", "expect fault B == NoFault within 10ms"]
     + expect_all(["SEARCH_LED_B"], 1, 10),
     ["The second search stage persists for 29 s without a fault.",
      "Chain B keeps the searched stage for 29 s without a fault."]),
    # TR-03
    ("Secure key latches secured",
     IN_SEARCH_2 + ["set SECURE_KEY = 1", "expect state ACCESS == SECURED within 50ms"]
     + expect_all(["SECURED_LED_A", "SECURED_LED_B", "SECURED_LED"], 1),
     ["SECURE_KEY in the second search stage moves chain A to SECURED.",
      "Both chains light their secured LED and the combined SECURED_LED is on.",
      "SECURED is reached within 50 ms of the key turn."]),
    ("Door lock follows secured", SECURED + expect_all(["DOOR_LOCK"], 1),
     ["DOOR_LOCK is on while the station is secured.",
      "DOOR_LOCK needs both chains secured."]),
    ("Secured holds after key release",
     SECURED + ["wait 500ms", "expect state ACCESS == SECURED within 10ms"]
     + expect_all(["SECURED_LED", "DOOR_LOCK"], 1, 10),
     ["Releasing SECURE_KEY does not drop SECURED.",
      "SECURED_LED stays on for as long as no trip occurs."]),
    ("Beam request grants shutter permit",
     BEAM_ON + ["expect state ACCESS == BEAM_ON within 10ms"],
     ["BEAM_REQ while secured asserts SHUTTER_PERMIT.",
      "Chain A enters BEAM_ON on a beam request while secured.",
      "SHUTTER_PERMIT rises within 50 ms of the beam request."]),
    ("Both chain permits asserted",
     BEAM_ON + expect_all(["SHUTTER_PERMIT_A", "SHUTTER_PERMIT_B"], 1, 10),
     ["Chain A asserts SHUTTER_PERMIT_A during beam.",
      "Chain B asserts SHUTTER_PERMIT_B during beam."]),
    ("Beam request release drops permit only",
     BEAM_ON + ["set BEAM_REQ = 0", "expect SHUTTER_PERMIT == 0 within 20ms",
                "expect state ACCESS == SECURED within 20ms"] + expect_all(["SECURED_LED"], 1),
     ["Releasing BEAM_REQ removes SHUTTER_PERMIT within two scans.",
      "Releasing BEAM_REQ returns the station to SECURED, not idle."]),
    ("Early beam request waits for secured",
     IN_SEARCH_2 + ["set BEAM_REQ = 1", "wait 200ms"] + expect_all(["SHUTTER_PERMIT", "SHUTTER_PERMIT_A", "SHUTTER_PERMIT_B"], 0, 10)
     + SECURE + ["expect SHUTTER_PERMIT == 1 within 50ms"],
     ["BEAM_REQ during the search asserts no permit.",
      "A held BEAM_REQ takes effect once the station is secured."]),
    ("Permit holds through a long beam",
     BEAM_ON + ["wait 60000ms"] + expect_all(["SHUTTER_PERMIT", "DOOR_LOCK", "SECURED_LED"], 1, 10),
     ["SHUTTER_PERMIT persists for 60 s of beam with no operator action.",
      "Secured state has no time limit."]),
    # TR-04
    ("Opening doors while secured trips",
     SECURED + OPEN_DOORS + ["expect state ACCESS == TRIPPED within 20ms"] + expect_all(["SECURED_LED", "DOOR_LOCK"], 0),
     ["Opening the doors while secured moves chain A to TRIPPED.",
      "SECURED_LED and DOOR_LOCK turn off on a door trip."]),
    ("Door opening removes permit within two scans",
     BEAM_ON + OPEN_DOORS + expect_all(["SHUTTER_PERMIT", "SHUTTER_PERMIT_A", "SHUTTER_PERMIT_B"], 0),
     ["Opening the doors during beam removes SHUTTER_PERMIT within two scans.",
      "Both chain permits drop on a door opening.",
      "Permit removal on a door opening needs no operator action."]),
    ("Door opening trips the first search stage",
     IN_SEARCH_1 + OPEN_DOORS + ["expect state ACCESS == TRIPPED within 20ms"] + expect_all(["SEARCH_LED_B"], 0),
     ["Opening the doors during the first search stage trips chain A.",
      "Chain B abandons the search when the doors open in the first stage."]),
    ("Door opening trips the second search stage",
     IN_SEARCH_2 + OPEN_DOORS + ["expect state ACCESS == TRIPPED within 20ms"] + expect_all(["SEARCH_LED_B"], 0),
     ["Opening the doors during the second search stage trips chain A.",
      "Chain B abandons the search when the doors open in the second stage."]),
    ("Trip clears lock and beacon",
     IN_SEARCH_2 + OPEN_DOORS + expect_all(["WARNING_BEACON", "DOOR_LOCK"], 0),
     ["WARNING_BEACON turns off on a trip.",
      "DOOR_LOCK is off after a trip."]),
    ("Closing doors does not restore secured",
     SECURED + OPEN_DOORS + ["wait 100ms"] + CLOSE_DOORS + ["wait 1000ms", "expect state ACCESS == TRIPPED within 10ms"]
     + expect_all(["SECURED_LED", "SECURED_LED_B"], 0, 10),
     ["Re-closing the doors leaves chain A in TRIPPED.",
      "Re-closing the doors does not re-secure chain B.",
      "Re-closing the doors does not turn SECURED_LED back on."]),
    ("Reset button returns a trip to idle",
     SECURED + OPEN_DOORS + ["wait 100ms"] + CLOSE_DOORS + ["wait 20ms"] + PRESS_RESET
     + ["expect state ACCESS == IDLE within 20ms"],
     ["RESET_BTN moves chain A from TRIPPED to IDLE.",
      "A trip without a latched fault needs only RESET_BTN."]),
    ("Full search again after a trip",
     SECURED + OPEN_DOORS + ["wait 100ms"] + CLOSE_DOORS + ["wait 20ms"] + PRESS_RESET + SEARCH_1 + SEARCH_2 + SECURE + BEAM,
     ["After a trip and reset a complete new search reaches SECURED.",
      "Beam permit is available again after the repeated search.",
      "Search LEDs light again on the repeated search."]),
    # TR-05
    ("User E-stop removes permit within two scans",
     BEAM_ON + ["set ESTOP_USER = 1"] + expect_all(["SHUTTER_PERMIT", "SHUTTER_PERMIT_A", "SHUTTER_PERMIT_B"], 0),
     ["ESTOP_USER during beam removes SHUTTER_PERMIT within two scans.",
      "ESTOP_USER drops both chain permits.",
      "ESTOP_USER during beam trips chain A out of BEAM_ON."]),
    ("Door E-stop removes permit within two scans",
     BEAM_ON + ["set ESTOP_DOOR = 1"] + expect_all(["SHUTTER_PERMIT", "SHUTTER_PERMIT_A", "SHUTTER_PERMIT_B"], 0),
     ["ESTOP_DOOR during beam removes SHUTTER_PERMIT within two scans.",
      "ESTOP_DOOR drops both chain permits.",
      "ESTOP_DOOR removes permit with the doors still closed."]),
    ("E-stop latches on both chains",
     SECURED + ["set ESTOP_USER = 1", "expect fault A == ESTOP_LATCH within 20ms", "expect fault B == ESTOP_LATCH within 20ms"],
     ["An emergency stop latches ESTOP_LATCH on chain A.",
      "An emergency stop latches ESTOP_LATCH on chain B."]),
    ("E-stop lights both fault LEDs",
     DOORS + ["set ESTOP_DOOR = 1"] + expect_all(["FAULT_LED_A", "FAULT_LED_B"], 1),
     ["FAULT_LED_A is on while chain A holds ESTOP_LATCH.",
      "FAULT_LED_B is on while chain B holds ESTOP_LATCH."]),
    ("E-stop during search drops the beacon",
     IN_SEARCH_1 + ["set ESTOP_USER = 1", "expect fault A == ESTOP_LATCH within 20ms"]
     + expect_all(["WARNING_BEACON", "SEARCH_LED_A", "SEARCH_LED_B"], 0),
     ["An emergency stop during a search latches ESTOP_LATCH.",
      "Search indication is removed on an emergency stop."]),
    ("Fault reset refused while E-stop held",
     DOORS + ["set ESTOP_USER = 1", "wait 20ms", "reset faults", "wait 20ms",
              "expect fault A == ESTOP_LATCH within 10ms", "expect fault B == ESTOP_LATCH within 10ms"]
     + expect_all(["FAULT_LED_A"], 1, 10),
     ["A fault reset with an emergency stop still pressed keeps ESTOP_LATCH.",
      "Fault LEDs stay on after a refused fault reset."]),
    ("Fault reset after E-stop release",
     SECURED + ["set ESTOP_USER = 1", "wait 50ms", "set ESTOP_USER = 0", "wait 20ms", "reset faults",
                "expect fault A == NoFault within 20ms", "expect fault B == NoFault within 20ms",
                "expect state ACCESS == IDLE within 20ms"] + expect_all(["SECURED_LED", "FAULT_LED_B"], 0),
     ["A fault reset after the emergency stop is released clears ESTOP_LATCH.",
      "A fault reset returns chain A to IDLE rather than SECURED.",
      "SECURED is not restored by a fault reset."]),
    ("Reset button clears a released E-stop",
     DOORS + ["set ESTOP_DOOR = 1", "wait 50ms", "set ESTOP_DOOR = 0", "wait 20ms"] + PRESS_RESET
     + ["expect fault A == NoFault within 20ms", "expect fault B == NoFault within 20ms"]
     + expect_all(["FAULT_LED_A", "FAULT_LED_B"], 0),
     ["RESET_BTN clears ESTOP_LATCH once the emergency stop is released.",
      "Both fault LEDs turn off after the reset."]),
    # TR-06
    ("Beam request alone never permits",
     DOORS + ["set BEAM_REQ = 1", "wait 1000ms"] + expect_all(["SHUTTER_PERMIT", "SHUTTER_PERMIT_A", "SHUTTER_PERMIT_B"], 0, 10),
     ["BEAM_REQ held for 1 s from idle never asserts a chain permit.",
      "BEAM_REQ held for 1 s from idle never asserts SHUTTER_PERMIT."]),
    ("Door contact 1 alone removes permit",
     BEAM_ON + ["set DOOR_CLOSED_1 = 0"] + expect_all(["SHUTTER_PERMIT", "SHUTTER_PERMIT_A", "SHUTTER_PERMIT_B"], 0),
     ["Opening door contact 1 alone removes all permits within two scans.",
      "A single open door contact trips chain A.",
      "A single open door contact trips chain B."]),
    ("Door contact 2 alone removes permit",
     BEAM_ON + ["set DOOR_CLOSED_2 = 0"] + expect_all(["SHUTTER_PERMIT", "SHUTTER_PERMIT_A", "SHUTTER_PERMIT_B"], 0),
     ["Opening door contact 2 alone removes all permits within two scans.",
      "A single open door contact trips chain B."]),
    ("Key without second search ignored",
     IN_SEARCH_1 + ["set SECURE_KEY = 1", "set BEAM_REQ = 1", "wait 500ms"]
     + expect_all(["SECURED_LED", "SHUTTER_PERMIT", "DOOR_LOCK"], 0, 10),
     ["Skipping SEARCH_BTN_2 prevents SECURED even with the key turned.",
      "Skipping SEARCH_BTN_2 prevents beam permit."]),
    ("Search restarts from the first button after a trip",
     IN_SEARCH_2 + OPEN_DOORS + ["wait 50ms"] + CLOSE_DOORS + ["wait 20ms"] + PRESS_RESET
     + ["set SEARCH_BTN_2 = 1", "wait 100ms", "expect state ACCESS == IDLE within 10ms"]
     + expect_all(["SEARCH_LED_B"], 0, 10),
     ["Search progress is discarded by a trip.",
      "SEARCH_BTN_2 after a trip and reset does not resume the search."]),
    ("Permit follows beam request toggling",
     BEAM_ON + ["set BEAM_REQ = 0", "expect SHUTTER_PERMIT == 0 within 20ms", "set BEAM_REQ = 1",
                "expect SHUTTER_PERMIT == 1 within 20ms", "set BEAM_REQ = 0", "expect SHUTTER_PERMIT == 0 within 20ms"],
     ["Permit is re-asserted on a new beam request while secured.",
      "Permit is removed on each beam request release."]),
    ("Reset button ignored during beam",
     BEAM_ON + PRESS_RESET + ["expect state ACCESS == BEAM_ON within 10ms"] + expect_all(["SHUTTER_PERMIT"], 1, 10),
     ["RESET_BTN without a trip or fault does not affect an active beam.",
      "RESET_BTN during beam leaves chain A in BEAM_ON."]),
    ("First search button ignored while secured",
     SECURED + ["set SEARCH_BTN_1 = 1", "wait 200ms", "expect state ACCESS == SECURED within 10ms"]
     + expect_all(["SECURED_LED"], 1, 10) + expect_all(["WARNING_BEACON"], 0, 10),
     ["SEARCH_BTN_1 while secured does not restart the search.",
      "SEARCH_BTN_1 while secured does not turn on the beacon."]),
    # TR-07
    ("Door contact disagreement latches discrepancy",
     DOORS + ["set DOOR_CLOSED_2 = 0", "expect fault A == DISCREPANCY within 100ms",
              "expect fault B == DISCREPANCY within 10ms"],
     ["Door contacts disagreeing for longer than the window latch DISCREPANCY on chain A.",
      "The same disagreement latches DISCREPANCY on chain B.",
      "DISCREPANCY latches within 100 ms of the disagreement."]),
    ("Short disagreement tolerated",
     DOORS + ["set DOOR_CLOSED_2 = 0", "wait 40ms", "set DOOR_CLOSED_2 = 1", "wait 200ms",
              "expect fault A == NoFault within 10ms", "expect fault B == NoFault within 10ms"],
     ["A 40 ms disagreement between door contacts raises no fault on chain A.",
      "A 40 ms disagreement between door contacts raises no fault on chain B."]),
    ("Discrepancy removes permit and lights LEDs",
     BEAM_ON + ["set DOOR_CLOSED_1 = 0", "expect fault A == DISCREPANCY within 100ms"]
     + expect_all(["SHUTTER_PERMIT", "SECURED_LED"], 0) + expect_all(["FAULT_LED_A", "FAULT_LED_B"], 1),
     ["DISCREPANCY leaves SHUTTER_PERMIT and SECURED_LED off.",
      "Both fault LEDs light on DISCREPANCY."]),
    ("Discrepancy stays latched after contacts agree",
     DOORS + ["set DOOR_CLOSED_1 = 0", "expect fault A == DISCREPANCY within 100ms", "set DOOR_CLOSED_1 = 1",
              "wait 500ms", "expect fault A == DISCREPANCY within 10ms", "expect fault B == DISCREPANCY within 10ms"],
     ["DISCREPANCY on chain A stays latched after the contacts agree again.",
      "DISCREPANCY on chain B stays latched after the contacts agree again."]),
    ("Fault reset refused while contacts disagree",
     DOORS + ["set DOOR_CLOSED_2 = 0", "expect fault A == DISCREPANCY within 100ms", "reset faults", "wait 20ms",
              "expect fault A == DISCREPANCY within 10ms", "expect fault B == DISCREPANCY within 10ms"],
     ["A fault reset with disagreeing contacts keeps DISCREPANCY on chain A.",
      "A fault reset with disagreeing contacts keeps DISCREPANCY on chain B."]),
    ("Fault reset clears discrepancy once contacts agree",
     DOORS + ["set DOOR_CLOSED_2 = 0", "expect fault A == DISCREPANCY within 100ms", "set DOOR_CLOSED_2 = 1",
              "wait 20ms", "reset faults", "expect fault A == NoFault within 20ms", "expect fault B == NoFault within 20ms"]
     + expect_all(["FAULT_LED_A", "FAULT_LED_B"], 0),
     ["A fault reset with agreeing contacts clears DISCREPANCY on both chains.",
      "Fault LEDs turn off after DISCREPANCY is cleared."]),
    ("Single closed contact latches discrepancy",
     ["set DOOR_CLOSED_1 = 1", "expect fault A == DISCREPANCY within 100ms", "expect fault B == DISCREPANCY within 10ms",
      "expect state ACCESS == IDLE within 10ms"],
     ["Door contact 1 closed with contact 2 open latches DISCREPANCY from idle.",
      "DISCREPANCY from idle leaves chain A in IDLE."]),
    ("Sequence works after a cleared discrepancy",
     DOORS + ["set DOOR_CLOSED_2 = 0", "expect fault A == DISCREPANCY within 100ms", "set DOOR_CLOSED_2 = 1",
              "wait 20ms"] + PRESS_RESET + SEARCH_1 + SEARCH_2 + SECURE + BEAM,
     ["RESET_BTN clears DISCREPANCY once the contacts agree.",
      "A complete search reaches beam permit after DISCREPANCY is cleared."]),
    # TR-08
    ("Chain A watchdog removes combined permit",
     BEAM_ON + ["inject A WATCHDOG", "expect fault A == WATCHDOG within 20ms"]
     + expect_all(["SHUTTER_PERMIT", "SHUTTER_PERMIT_A"], 0),
     ["A WATCHDOG fault on chain A forces SHUTTER_PERMIT_A off.",
      "A fault on chain A alone removes the combined SHUTTER_PERMIT."]),
    ("Healthy chain B keeps its own permit",
     BEAM_ON + ["inject A WATCHDOG", "wait 50ms", "expect fault B == NoFault within 10ms"]
     + expect_all(["SHUTTER_PERMIT_B"], 1, 10) + expect_all(["SHUTTER_PERMIT"], 0, 10),
     ["A fault on chain A does not fault chain B.",
      "Chain B keeps SHUTTER_PERMIT_B while only chain A is faulted.",
      "The combined SHUTTER_PERMIT stays off while chain A is faulted."]),
    ("Chain B watchdog removes combined permit",
     BEAM_ON + ["inject B WATCHDOG", "expect fault B == WATCHDOG within 20ms"]
     + expect_all(["SHUTTER_PERMIT", "SHUTTER_PERMIT_B"], 0) + expect_all(["SHUTTER_PERMIT_A"], 1),
     ["A WATCHDOG fault on chain B forces SHUTTER_PERMIT_B off.",
      "Chain A keeps SHUTTER_PERMIT_A while only chain B is faulted."]),
    ("Watchdog lights only its own fault LED",
     DOORS + ["inject B WATCHDOG"] + expect_all(["FAULT_LED_B"], 1) + expect_all(["FAULT_LED_A"], 0),
     ["FAULT_LED_B is on while chain B is faulted.",
      "FAULT_LED_A stays off while only chain B is faulted."]),
    ("First latched fault wins",
     DOORS + ["inject A WATCHDOG", "wait 20ms", "set DOOR_CLOSED_1 = 0",
              "expect fault B == DISCREPANCY within 100ms", "expect fault A == WATCHDOG within 10ms"],
     ["A later fault does not overwrite a latched fault code.",
      "A discrepancy still latches on the chain that had no fault."]),
    ("Fault reset clears a watchdog",
     SECURED + ["inject A WATCHDOG", "wait 20ms", "reset faults", "expect fault A == NoFault within 20ms",
                "expect state ACCESS == IDLE within 20ms"] + expect_all(["FAULT_LED_A", "SECURED_LED_B"], 0),
     ["A fault reset clears WATCHDOG on chain A.",
      "A fault reset reinitializes both chains to idle.",
      "FAULT_LED_A turns off after the watchdog is cleared."]),
    ("No combined permit while a chain is faulted",
     SECURED + ["inject A WATCHDOG", "wait 20ms", "set BEAM_REQ = 1", "wait 200ms"]
     + expect_all(["SHUTTER_PERMIT", "SHUTTER_PERMIT_A"], 0, 10) + expect_all(["SHUTTER_PERMIT_B"], 1, 10),
     ["A beam request with chain A faulted asserts no combined permit.",
      "Chain B alone asserts its permit on the same beam request."]),
    ("Combined secured needs both chains",
     IN_SEARCH_2 + ["inject B WATCHDOG", "wait 20ms", "set SECURE_KEY = 1", "wait 100ms",
                    "expect state ACCESS == SECURED within 10ms"]
     + expect_all(["SECURED_LED_A"], 1, 10) + expect_all(["SECURED_LED", "DOOR_LOCK", "SECURED_LED_B"], 0, 10),
     ["SECURED_LED needs both chains secured.",
      "A faulted chain B leaves DOOR_LOCK off even with chain A secured."]),
    # TR-09
    ("First stage expires after the search window",
     IN_SEARCH_1 + ["expect fault A == SEARCH_TIMEOUT within 30100ms", "expect state ACCESS == EXPIRED within 10ms"],
     ["Chain A latches SEARCH_TIMEOUT when the first stage exceeds 30 s.",
      "Chain A enters EXPIRED on a first stage timeout.",
      "The first stage timeout latches within 30.1 s of the search start."]),
    ("Chain B times out the first stage",
     IN_SEARCH_1 + ["expect fault B == SEARCH_TIMEOUT within 30100ms"] + expect_all(["SEARCH_LED_B"], 0, 10),
     ["Chain B latches SEARCH_TIMEOUT when the first stage exceeds 30 s.",
      "Chain B abandons the search on a timeout."]),
    ("Second stage expires without the key",
     IN_SEARCH_2 + ["expect fault A == SEARCH_TIMEOUT within 30100ms", "expect fault B == SEARCH_TIMEOUT within 20ms"],
     ["The second stage times out after 30 s without SECURE_KEY on chain A.",
      "The second stage times out after 30 s without SECURE_KEY on chain B."]),
    ("Expired search shows faults not searching",
     IN_SEARCH_1 + ["wait 30100ms"] + expect_all(["WARNING_BEACON", "SECURED_LED"], 0, 10)
     + expect_all(["FAULT_LED_A", "FAULT_LED_B"], 1, 10),
     ["WARNING_BEACON is off after a search timeout.",
      "Both fault LEDs are on after a search timeout."]),
    ("Late second button keeps the search alive",
     IN_SEARCH_1 + ["wait 29500ms"] + SEARCH_2 + ["wait 1000ms", "expect fault A == NoFault within 10ms",
                                                 "expect fault B == NoFault within 10ms"] + SECURE,
     ["SEARCH_BTN_2 inside the window starts a fresh window for the second stage.",
      "Securing after a late second button succeeds."]),
    ("New search after a timeout reset",
     IN_SEARCH_1 + ["expect fault A == SEARCH_TIMEOUT within 30100ms", "wait 20ms", "reset faults",
                    "expect fault A == NoFault within 20ms", "expect fault B == NoFault within 20ms"]
     + SEARCH_1 + SEARCH_2 + SECURE,
     ["A fault reset clears SEARCH_TIMEOUT on both chains.",
      "A complete search succeeds after a timeout is cleared."]),
    ("Timeout blocks the beam",
     IN_SEARCH_2 + ["set BEAM_REQ = 1", "set SECURE_KEY = 0", "wait 31000ms"]
     + expect_all(["SHUTTER_PERMIT", "SHUTTER_PERMIT_A", "SHUTTER_PERMIT_B", "DOOR_LOCK"], 0, 10),
     ["A beam request during an expired search asserts no permit.",
      "DOOR_LOCK stays off through a search timeout."]),
    ("Reset button clears a search timeout",
     IN_SEARCH_1 + ["expect fault B == SEARCH_TIMEOUT within 30100ms", "wait 20ms"] + PRESS_RESET
     + ["expect fault A == NoFault within 20ms", "expect fault B == NoFault within 20ms",
        "expect state ACCESS == IDLE within 20ms"],
     ["RESET_BTN clears SEARCH_TIMEOUT on both chains.",
      "RESET_BTN returns chain A to IDLE after a timeout.",
      "RESET_BTN after a timeout needs no separate fault reset command."]),
]


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "suite")
    assert len(CASES) == 72, len(CASES)
    cases_dir = out / "cases"
    cases_dir.mkdir(parents=True, exist_ok=True)
    for old in cases_dir.glob("*.tc"):
        old.unlink()

    reqs = []
    links = []
    runs = []
    builds = []
    for b, (bid, bname, btext) in enumerate(HIGH, start=1):
        hr = f"HR-{b}"
        reqs.append(f"{hr}|High||{btext}")
        links.append(f"{hr} -> {bid}")
        run_ids = []
        for r in range(1, 4):
            run_index = (b - 1) * 3 + (r - 1)
            rid, rname, rtext = RUNS[run_index]
            ir = f"IR-{b}.{r}"
            reqs.append(f"{ir}|Intermediate|{hr}|{rtext}")
            links.append(f"{ir} -> {rid}")
            case_ids = []
            n = 0
            for c in range(8):
                case_index = run_index * 8 + c
                title, steps, details = CASES[case_index]
                cid = f"TC-{case_index + 1:03d}"
                covers = []
                for text in details:
                    n += 1
                    dr = f"DR-{b}.{r}.{n}"
                    reqs.append(f"{dr}|Detail|{ir}|{text}")
                    links.append(f"{dr} -> {cid}")
                    covers.append(dr)
                body = [f'case {cid} "{title}"', "covers " + ", ".join(covers)] + steps
                (cases_dir / f"{cid}.tc").write_text("\n".join(body) + "\n")
                case_ids.append(cid)
            runs.append({"id": rid, "name": rname, "cases": case_ids})
            run_ids.append(rid)
        builds.append({"id": bid, "name": bname, "station": "stations/station-a", "runs": run_ids})

    suite = {"name": "Station A validation", "cases_dir": "cases", "builds": builds, "runs": runs}
    (out / "suite.json").write_text(json.dumps(suite, indent=2) + "\n")
    (out / "requirements.txt").write_text(
        "# id|level|parent|text\n" + "\n".join(reqs) + "\n")
    (out / "links.txt").write_text("# requirement -> unit\n" + "\n".join(links) + "\n")
    detail = sum(1 for r in reqs if "|Detail|" in r)
    print(f"{len(CASES)} cases, {len(reqs)} requirements ({detail} detail), {len(links)} links")


if __name__ == "__main__":
    main()
