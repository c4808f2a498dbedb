import { el } from "./dom.js";
import { formatAnswerValue, formatCf } from "./format.js";
import type { ProofNode, WhyStep } from "./types.js";

/** The rule stack behind a pending question, innermost goal first. */
export function renderWhyPane(attribute: string, chain: WhyStep[]): HTMLElement {
  const pane = el("section", { class: "why-pane", "data-role": "why-pane" });
  pane.append(el("h3", {}, `Why is ${attribute} asked?`));
  const list = el("ol", { class: "why-chain" });
  for (const step of chain) {
    const item = el("li", { class: "why-step" });
    if (step.rule) {
      item.append(
        el("span", { class: "why-rule" }, `via rule ${step.rule} (concluding ${step.attribute})`),
      );
      if (step.citation) {
        item.append(el("blockquote", { class: "citation" }, step.citation));
      }
    } else {
      item.append(el("span", { class: "why-goal" }, `needed to settle ${step.attribute}`));
    }
    list.append(item);
  }
  pane.append(list);
  return pane;
}

function proofItem(node: ProofNode): HTMLElement {
  const item = el("li", { class: "proof-node" });
  item.append(
    el(
      "span",
      { class: "proof-line", "data-attribute": node.attribute },
      `${node.attribute} = ${formatAnswerValue(node.value)} (cf ${formatCf(node.cf)}) [${node.source}]`,
    ),
  );
  if (node.children && node.children.length) {
    const sub = el("ul", { class: "proof-children" });
    for (const child of node.children) sub.append(proofItem(child));
    item.append(sub);
  }
  return item;
}

/** The derivation tree behind a settled value. */
export function renderHowPane(attribute: string, proofs: ProofNode[]): HTMLElement {
  const pane = el("section", { class: "how-pane", "data-role": "how-pane" });
  pane.append(el("h3", {}, `How was ${attribute} derived?`));
  const list = el("ul", { class: "proof-tree" });
  for (const proof of proofs) list.append(proofItem(proof));
  pane.append(list);
  return pane;
}
