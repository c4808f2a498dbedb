import { describe, expect, it } from "vitest";
import { renderHowPane, renderWhyPane } from "../src/explain.js";
import type { HowOut, WhyOut } from "../src/types.js";
import whyJson from "./fixtures/why_first_question.json";
import howJson from "./fixtures/how_initial_cost.json";

const why = whyJson as WhyOut;
const how = howJson as HowOut;

describe("why pane", () => {
  it("walks the rule stack from the goal down", () => {
    const pane = renderWhyPane(why.attribute, why.chain);
    const steps = [...pane.querySelectorAll(".why-step")];
    expect(steps.length).toBe(why.chain.length);
    expect(steps[0]?.textContent).toContain("needed to settle business_verdict");
    expect(steps[1]?.textContent).toContain("via rule biz_scarce_expertise");
  });

  it("quotes the citation verbatim", () => {
    const pane = renderWhyPane(why.attribute, why.chain);
    const citation = pane.querySelector(".citation");
    expect(citation?.textContent).toBe(why.chain[1]?.citation);
  });
});

describe("how pane", () => {
  it("renders the proof tree with values, certainties, and sources", () => {
    const pane = renderHowPane(how.attribute, how.proofs);
    const root = pane.querySelector(".proof-line");
    expect(root?.textContent).toBe("initial_cost_estimate = 55000 (cf 1.00) [computed:development_cost]");
  });

  it("nests the inputs the calculator consumed, in order", () => {
    const pane = renderHowPane(how.attribute, how.proofs);
    const children = [...pane.querySelectorAll(".proof-children .proof-line")].map((n) =>
      n.getAttribute("data-attribute"),
    );
    expect(children).toEqual(["dev_effort_months", "salary_rate", "software_cost", "hardware_cost"]);
    const firstChild = pane.querySelector(".proof-children .proof-line");
    expect(firstChild?.textContent).toBe("dev_effort_months = 9 (cf 1.00) [answer]");
  });
});
