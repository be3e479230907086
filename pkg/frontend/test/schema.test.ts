import { describe, expect, it } from "vitest";

import { conditionLabel, parseSession, SessionPayloadSchema } from "../src/types.js";

const validPayload = {
  schema: "dbl-session/1",
  subject_slot: "s1",
  items: [
    {
      item_id: "scene1",
      stimuli: ["a1", "b2", "c3", "d4", "e5", "f6", "g7", "h8"],
      order: [3, 1, 0, 2, 7, 6, 5, 4],
      trial: false,
    },
  ],
};

describe("session payload schema", () => {
  it("accepts the blind contract", () => {
    const session = parseSession(validPayload);
    expect(session.items[0]!.stimuli).toHaveLength(8);
  });

  it("rejects any level metadata on items (blindness)", () => {
    for (const extra of [
      { ld_lu: 9.0 },
      { attenuation: 3 },
      { measured_ld_lu: 1.2 },
      { lufs: -23 },
      { gain_db: -3 },
    ]) {
      const tainted = {
        ...validPayload,
        items: [{ ...validPayload.items[0], ...extra }],
      };
      expect(() => parseSession(tainted)).toThrowError();
    }
  });

  it("rejects level metadata at the top level", () => {
    expect(() => parseSession({ ...validPayload, condition_lds: [0, 3] })).toThrowError();
  });

  it("rejects a non-permutation order", () => {
    const broken = {
      ...validPayload,
      items: [{ ...validPayload.items[0], order: [0, 0, 1, 2, 3, 4, 5, 6] }],
    };
    expect(() => parseSession(broken)).toThrowError();
    const short = {
      ...validPayload,
      items: [{ ...validPayload.items[0], order: [0, 1, 2] }],
    };
    expect(() => parseSession(short)).toThrowError();
  });

  it("rejects the wrong schema tag", () => {
    expect(() => parseSession({ ...validPayload, schema: "dbl-session/2" })).toThrowError();
    expect(SessionPayloadSchema.safeParse({}).success).toBe(false);
  });

  it("labels conditions neutrally A..H", () => {
    expect([0, 1, 2, 7].map(conditionLabel)).toEqual(["A", "B", "C", "H"]);
  });
});
