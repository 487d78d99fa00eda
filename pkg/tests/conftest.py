import pytest

from gatescope.library import parse_liberty

DEMO_LIB = """
library (demo) {
  cell (INV) {
    pin (A) { direction : input; }
    pin (Y) { direction : output; function : "!A"; }
  }
  cell (BUF) {
    pin (A) { direction : input; }
    pin (Y) { direction : output; function : "A"; }
  }
  cell (AND2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (Y) { direction : output; function : "A & B"; }
  }
  cell (OR2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (Y) { direction : output; function : "A | B"; }
  }
  cell (NAND2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (Y) { direction : output; function : "!(A & B)"; }
  }
  cell (NOR2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (Y) { direction : output; function : "!(A | B)"; }
  }
  cell (XOR2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (Y) { direction : output; function : "A ^ B"; }
  }
  cell (XNOR2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (Y) { direction : output; function : "!(A ^ B)"; }
  }
  cell (AND3) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (C) { direction : input; }
    pin (Y) { direction : output; function : "A & B & C"; }
  }
  cell (MUX2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (S) { direction : input; }
    pin (Y) { direction : output; function : "(!S & A) | (S & B)"; }
  }
  cell (TIE0) {
    pin (Y) { direction : output; function : "0"; }
  }
  cell (TIE1) {
    pin (Y) { direction : output; function : "1"; }
  }
  cell (DFF) {
    ff (IQ, IQN) {
      next_state : "D";
      clocked_on : "CK";
    }
    pin (D) { direction : input; }
    pin (CK) { direction : input; clock : true; }
    pin (Q) { direction : output; function : "IQ"; }
    pin (QN) { direction : output; function : "IQN"; }
  }
  cell (DFFE) {
    ff (IQ, IQN) {
      next_state : "(E & D) | (!E & IQ)";
      clocked_on : "CK";
    }
    pin (D) { direction : input; }
    pin (E) { direction : input; }
    pin (CK) { direction : input; clock : true; }
    pin (Q) { direction : output; function : "IQ"; }
  }
  cell (DFFR) {
    ff (IQ, IQN) {
      next_state : "D";
      clocked_on : "CK";
      clear : "!RN";
    }
    pin (D) { direction : input; }
    pin (RN) { direction : input; }
    pin (CK) { direction : input; clock : true; }
    pin (Q) { direction : output; function : "IQ"; }
    pin (QN) { direction : output; function : "IQN"; }
  }
  cell (DFFS) {
    ff (IQ, IQN) {
      next_state : "D";
      clocked_on : "CK";
      preset : "!SN";
    }
    pin (D) { direction : input; }
    pin (SN) { direction : input; }
    pin (CK) { direction : input; clock : true; }
    pin (Q) { direction : output; function : "IQ"; }
  }
}
"""


@pytest.fixture(scope="session")
def demo_lib():
    return parse_liberty(DEMO_LIB, "demo.lib")
