import { describe, expect, it } from "vitest";

import { variationLetter } from "../src/letters.js";

describe("variationLetter", () => {
  it("labels the first variations A through Z", () => {
    expect(variationLetter(0)).toBe("A");
    expect(variationLetter(1)).toBe("B");
    expect(variationLetter(25)).toBe("Z");
  });

  it("wraps to AA after Z", () => {
    expect(variationLetter(26)).toBe("AA");
    expect(variationLetter(27)).toBe("AB");
    expect(variationLetter(51)).toBe("AZ");
    expect(variationLetter(52)).toBe("BA");
    expect(variationLetter(702)).toBe("AAA");
  });

  it("matches a brute-force enumeration", () => {
    const alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ".split("");
    const all: string[] = [...alphabet];
    for (const a of alphabet) for (const b of alphabet) all.push(a + b);
    for (let i = 0; i < all.length; i++) {
      expect(variationLetter(i)).toBe(all[i]);
    }
  });

  it("rejects negative indexes", () => {
    expect(() => variationLetter(-1)).toThrow();
  });
});
