// Variation buttons are lettered by creation order: A..Z, then AA, AB, ...
export function variationLetter(index: number): string {
  if (index < 0) throw new Error(`negative variation index: ${index}`);
  let label = "";
  let n = index;
  for (;;) {
    label = String.fromCharCode(65 + (n % 26)) + label;
    n = Math.floor(n / 26) - 1;
    if (n < 0) return label;
  }
}
