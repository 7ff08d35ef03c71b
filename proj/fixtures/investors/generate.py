#!/usr/bin/env python3
"""Builds fixture.json: a scripted three-round research run on the investment
philosophies of Duan Yongping, Warren Buffett and Charlie Munger.

Round layout (evidence ids are assigned by the bank in retrieval order):
  init     5 outline queries            -> id_1  .. id_25
  iter 1   chain queries + extras        -> id_26 .. id_49
  iter 2   chain queries + outline ones  -> id_50 .. id_75, then early stop
"""

import json
import re
from pathlib import Path

HERE = Path(__file__).resolve().parent

ROOT = "What are the investment philosophies of Duan Yongping, Warren Buffett, and Charlie Munger?"
TITLE = "Comparative Analysis of Investment Philosophies: Duan Yongping, Warren Buffett, and Charlie Munger"

OG0 = TITLE + """
1. Introduction
    1.1 Purpose and Scope
    1.2 Overview of Subject Investors
    1.3 Structure of the Report
2. Duan Yongping’s Investment Philosophy
    2.1 Background and Influences
    2.2 Core Principles
    2.2.1 Value Investing Approach
        a. Focus on intrinsic value and margin of safety
        b. Importance of long-term holding
    2.2.2 Emphasis on Simplicity and Patience
        a. Avoiding complex investments
        b. Waiting for clear opportunities
    2.2.3 Risk Management Strategies
        a. Selective investment decisions
        b. Use of cash reserves
    2.3 Notable Investments and Strategies
    2.4 Impact on Chinese Investment Community
3. Warren Buffett’s Investment Philosophy
    3.1 Background and Influences
    3.2 Core Principles
        3.2.1 Intrinsic Value and Margin of Safety
            a. Valuing a business by its future cash flows
            b. Buying well below estimated value
        3.2.2 Quality Businesses and Durable Advantages
            a. Preference for durable competitive advantages
        3.2.3 Long-Term Ownership
            a. Holding great businesses for decades
    3.3 Notable Investments
4. Charlie Munger’s Investment Philosophy
    4.1 Background and Influences
    4.2 Core Principles
        4.2.1 Mental Models and Multidisciplinary Thinking
        4.2.2 Inversion and Avoiding Mistakes
        4.2.3 Concentration and Opportunity Cost
    4.3 Influence on Berkshire Hathaway
5. Comparative Analysis
    5.1 Shared Foundations
    5.2 Key Differences
    5.3 Adaptation to Market Context
6. Conclusion
    6.1 Summary of Findings
    6.2 Lessons for Investors
"""

OG1 = TITLE + """
1. Introduction
    1.1 Purpose and Scope
    1.2 Overview of Subject Investors <citation>id_1, id_16, id_21</citation>
    1.3 Structure of the Report
2. Duan Yongping’s Investment Philosophy
    2.1 Background and Influences <citation>id_1, id_4</citation>
    2.2 Core Principles
        2.2.1 Value Investing and Intrinsic Value
            a. Investing is buying a company, not just a stock; focus on business fundamentals and future cash flows <citation>id_29, id_30, id_31, id_32, id_33, id_34</citation>
            b. Margin of safety is rooted in deep understanding rather than simply buying cheap <citation>id_32, id_34</citation>
            c. Focusing on undervalued opportunities and qualitative discounted cash flow estimation <citation>id_34</citation>
        2.2.2 Simplicity and Clarity
            a. Maintain a "Do Not Do" list and operate strictly within one's circle of competence <citation>id_28, id_29, id_30, id_34</citation>
            b. Avoid complex, speculative, or poorly understood investments <citation>id_28, id_29, id_30, id_31, id_34</citation>
            c. Require business model clarity and transparency; invest only in understandable enterprises <citation>id_29, id_30, id_33, id_34</citation>
        2.2.3 Emotional Discipline and Patience
            a. Importance of rational, disciplined analysis over emotional reactions to market volatility <citation>id_30, id_33</citation>
            b. Prioritizing long-term holding and compounding returns over short-term market movements <citation>id_29, id_30, id_31, id_32, id_33, id_34</citation>
        2.2.4 Risk Management and Trust
            a. Adapting value investing to emerging markets: due diligence, trustworthiness, strict "Don't Do List" for risk mitigation <citation>id_26, id_28, id_34</citation>
            b. Only invest in trustworthy ventures and avoid those with misaligned values <citation>id_26, id_33</citation>
            c. Preserving capital by avoiding speculation and high-risk/immature markets <citation>id_26, id_31, id_34</citation>
        2.2.5 Value Alignment and Foundational Philosophy
            a. Invest in companies with clear, steadfast core philosophies and value alignment <citation>id_29, id_33</citation>
            b. Company culture and values fundamentally drive business sustainability <citation>id_29, id_34</citation>
        2.2.6 Opportunity Cost as a Decision Filter
            a. Evaluate choices against the best available alternative; reject "okay" opportunities when a better one exists <citation>id_35</citation>
            b. Treat opportunity cost as an implicit "Do Not Do" rule in capital allocation <citation>id_36</citation>
    2.3 Notable Investments and Strategies <citation>id_11, id_12, id_13</citation>
    2.4 Impact on Chinese Investment Community <citation>id_1, id_2, id_3</citation>
3. Warren Buffett’s Investment Philosophy
    3.1 Background and Influences <citation>id_39</citation>
    3.2 Core Principles
        3.2.1 Intrinsic Value and Margin of Safety
            a. Valuing a business by its future cash flows <citation>id_16, id_40, id_43</citation>
            b. Buying well below estimated value <citation>id_17, id_41</citation>
        3.2.2 Quality Businesses and Durable Advantages
            a. Preference for durable competitive advantages <citation>id_18</citation>
        3.2.3 Long-Term Ownership
            a. Holding great businesses for decades <citation>id_18, id_42</citation>
    3.3 Investing Beyond the United States <citation>id_37, id_38</citation>
4. Charlie Munger’s Investment Philosophy
    4.1 Background and Influences <citation>id_21</citation>
    4.2 Core Principles
        4.2.1 Mental Models and Multidisciplinary Thinking <citation>id_45, id_48</citation>
        4.2.2 Inversion and Avoiding Mistakes <citation>id_22, id_24</citation>
        4.2.3 Concentration and Opportunity Cost <citation>id_21, id_46</citation>
    4.3 Influence on Berkshire Hathaway <citation>id_23, id_25</citation>
    4.4 Views on Emerging Markets <citation>id_44, id_49</citation>
5. Comparative Analysis
    5.1 Shared Foundations <citation>id_4, id_18, id_23</citation>
    5.2 Key Differences <citation>id_19, id_26, id_45</citation>
    5.3 Adaptation to Market Context <citation>id_26, id_37, id_44</citation>
6. Conclusion
    6.1 Summary of Findings
    6.2 Lessons for Investors
"""

OG2 = TITLE + """

1. Introduction
    1.1 Purpose and Scope
    1.2 Overview of Subject Investors <citation>id_1, id_16, id_21</citation>
    1.3 Structure of the Report
2. Duan Yongping’s Investment Philosophy
    2.1 Background and Influences <citation>id_1, id_4</citation>
        2.1.1 Intellectual Lineage and Relationship to Buffett and Munger <citation>id_60</citation>
            a. Duan as Buffett’s student and firm practitioner of value investing
            b. Philosophical continuity and adaptation to Chinese context
    2.2 Core Principles
        2.2.1 Value Investing and Intrinsic Value
            a. Investing is buying a company, not just a stock; focus on business fundamentals and future cash flows <citation>id_29, id_30, id_31, id_32, id_33, id_34, id_50, id_51, id_56, id_59</citation>
            b. Margin of safety is rooted in deep understanding rather than simply buying cheap <citation>id_32, id_34, id_52, id_53, id_54</citation>
            c. Focusing on undervalued opportunities and qualitative discounted cash flow estimation <citation>id_34, id_54, id_56</citation>
            d. Preference for conservative, gross estimates and qualitative judgment over mathematical precision <citation>id_56</citation>
        2.2.2 Simplicity and Clarity
            a. Maintain a "Do Not Do" list and operate strictly within one's circle of competence <citation>id_28, id_29, id_30, id_34, id_50</citation>
            b. Avoid complex, speculative, or poorly understood investments; caution toward emerging technologies <citation>id_28, id_29, id_30, id_31, id_34, id_50, id_72</citation>
            c. Require business model clarity and transparency; invest only in understandable enterprises <citation>id_29, id_30, id_33, id_34, id_50</citation>
        2.2.3 Emotional Discipline and Patience
            a. Importance of rational, disciplined analysis over emotional reactions to market volatility; avoidance of FOMO <citation>id_30, id_33, id_50, id_58</citation>
            b. Prioritizing long-term holding and compounding returns over short-term market movements <citation>id_29, id_30, id_31, id_32, id_33, id_34, id_50, id_51, id_58</citation>
        2.2.4 Risk Management and Trust
            a. Adapting value investing to emerging markets: due diligence, trustworthiness, strict "Don't Do List" for risk mitigation <citation>id_26, id_28, id_34, id_50, id_51</citation>
            b. Only invest in trustworthy ventures and avoid those with misaligned values <citation>id_26, id_33, id_50, id_51</citation>
            c. Preserving capital by avoiding speculation, leverage, and high-risk/immature markets; maintain cash reserves for unknowns <citation>id_26, id_31, id_34, id_50, id_51, id_52, id_53, id_75</citation>
        2.2.5 Value Alignment and Foundational Philosophy
            a. Invest in companies with clear, steadfast core philosophies and value alignment <citation>id_29, id_33, id_50</citation>
            b. Company culture and values fundamentally drive business sustainability <citation>id_29, id_34, id_50, id_57, id_59</citation>
            c. Consumer orientation as the essence of good corporate culture <citation>id_57</citation>
        2.2.6 Opportunity Cost as a Decision Filter
            a. Evaluate choices against the best available alternative; reject "okay" opportunities when a better one exists <citation>id_35, id_50</citation>
            b. Treat opportunity cost as an implicit "Do Not Do" rule in capital allocation <citation>id_36, id_50</citation>
    2.3 Notable Investments and Strategies <citation>id_11, id_12, id_13</citation>
    2.4 Impact on Chinese Investment Community <citation>id_1, id_2, id_3</citation>
3. Warren Buffett’s Investment Philosophy
    3.1 Background and Influences <citation>id_39, id_61, id_62</citation>
        3.1.1 From Graham's Cigar Butts to Quality Compounders <citation>id_63, id_73, id_74</citation>
            a. Influence of Munger on the shift toward quality at a fair price <citation>id_64, id_74</citation>
    3.2 Core Principles
        3.2.1 Intrinsic Value and Margin of Safety
            a. Valuing a business by its future cash flows <citation>id_16, id_40, id_43</citation>
            b. Buying well below estimated value <citation>id_17, id_41</citation>
        3.2.2 Quality Businesses and Durable Advantages
            a. Preference for durable competitive advantages <citation>id_18, id_74</citation>
        3.2.3 Long-Term Ownership
            a. Holding great businesses for decades <citation>id_18, id_42, id_70</citation>
    3.3 Investing Beyond the United States <citation>id_37, id_38, id_68, id_69</citation>
4. Charlie Munger’s Investment Philosophy
    4.1 Background and Influences <citation>id_21</citation>
    4.2 Core Principles
        4.2.1 Mental Models and Multidisciplinary Thinking <citation>id_45, id_48, id_67, id_71</citation>
        4.2.2 Inversion and Avoiding Mistakes <citation>id_22, id_24</citation>
        4.2.3 Concentration and Opportunity Cost <citation>id_21, id_46, id_66</citation>
    4.3 Influence on Berkshire Hathaway <citation>id_23, id_25, id_64</citation>
    4.4 Views on Emerging Markets <citation>id_44, id_49, id_65</citation>
5. Comparative Analysis
    5.1 Shared Foundations <citation>id_4, id_18, id_23, id_60</citation>
    5.2 Key Differences <citation>id_19, id_26, id_45, id_71, id_72</citation>
    5.3 Adaptation to Market Context <citation>id_26, id_37, id_44, id_65, id_68</citation>
6. Conclusion
    6.1 Summary of Findings
    6.2 Lessons for Investors
"""

# Entities and concepts of the knowledge graph, by short key.
CORES = {"D": "Duan Yongping", "B": "Warren Buffett", "M": "Charlie Munger"}
CONCEPTS = {
    "VI": "value investing",
    "IV": "intrinsic value",
    "MS": "margin of safety",
    "LT": "long-term holding",
    "CC": "circle of competence",
    "OC": "opportunity cost",
    "EM": "emerging markets",
    "DND": "do not do list",
    "CUL": "corporate culture",
    "DCF": "discounted cash flow",
    "BG": "Benjamin Graham",
    "MM": "mental models",
    "LEV": "leverage",
    "CASH": "cash reserves",
    "CO": "consumer orientation",
    "FOMO": "fear of missing out",
    "CIG": "cigar-butt investing",
    "QB": "quality businesses",
    "MD": "multidisciplinary thinking",
    "ET": "emerging technologies",
}

# Retrieval rounds: (query, [evidence, ...]); evidence = (slug, title, summary, content, [fact, ...]),
# fact = (source key, relation, target key).
INIT_QUERIES = [
    ("influence of Duan Yongping’s investment philosophy on Chinese retail investors", [
        ("duan-retail-following", "How Duan Yongping shaped a generation of Chinese investors",
         "Duan's value-investing outlook is widely followed by Chinese retail investors and founders.",
         "Forum archives show retail investors quoting Duan on buying businesses rather than tickers.",
         [("D", "practices", "VI")]),
        ("duan-patience-lessons", "Patience lessons from Duan Yongping",
         "Duan urges investors to hold good companies for many years instead of trading.",
         "He describes selling a great business early as the most common and costly mistake.",
         [("D", "favors", "LT")]),
        ("duan-know-what-you-own", "Duan Yongping: invest only in what you understand",
         "Duan restricts himself to businesses he can explain and tells followers to do the same.",
         "Admitting ignorance of a business is presented as a strength, not a weakness.",
         [("D", "stays within", "CC")]),
        ("duan-buffett-lunch", "Duan Yongping and the Buffett lunch",
         "Duan presents himself as a disciple of Buffett-style value investing and long holding periods.",
         "After the charity lunch he said the main lesson was to keep things simple and stay patient.",
         [("D", "favors", "LT")]),
        ("duan-value-of-a-company", "What a company is worth, according to Duan",
         "Duan frames value as the cash a business will return over its remaining life.",
         "He adds that the estimate is rough and mostly a matter of understanding the business.",
         [("D", "estimates", "IV")]),
    ]),
    ("Duan Yongping’s approach to risk management in volatile markets", [
        ("duan-risk-understanding", "Risk is not knowing what you are doing",
         "Duan treats a deep understanding of the business as his margin of safety.",
         "Price drops are described as irrelevant when the underlying business is understood.",
         [("D", "demands", "MS")]),
        ("duan-volatility", "Duan Yongping on market volatility",
         "Duan avoids businesses outside his competence, which he sees as the main source of risk.",
         "He warns that volatility only hurts investors who do not know what they own.",
         [("D", "stays within", "CC")]),
        ("duan-no-margin-calls", "Why Duan refuses borrowed money",
         "Duan keeps a margin of safety by never investing with money he may need soon.",
         "He recounts watching leveraged acquaintances forced to sell at the bottom.",
         [("D", "demands", "MS")]),
        ("duan-holding-through-drawdowns", "Holding through drawdowns",
         "Duan held core positions through deep drawdowns because the businesses were intact.",
         "He says a long holding period turns volatility into noise.",
         [("D", "favors", "LT")]),
        ("duan-stop-doing", "Duan Yongping on saying no",
         "Duan manages risk by declining anything he cannot understand.",
         "Most opportunities, he says, should be answered with a polite no.",
         [("D", "stays within", "CC")]),
    ]),
    ("examples of Duan Yongping’s notable investments and their outcomes", [
        ("duan-netease", "Duan Yongping's NetEase investment",
         "Duan bought NetEase far below what he judged the business to be worth.",
         "The position was bought during the dot-com bust and held for years.",
         [("D", "estimates", "IV")]),
        ("duan-apple", "Duan Yongping's long Apple position",
         "Duan has owned Apple for more than a decade and calls it his largest holding.",
         "He credits the product culture rather than any short-term catalyst.",
         [("D", "favors", "LT")]),
        ("duan-moutai", "Duan and Kweichow Moutai",
         "Duan bought Moutai shares when he judged the price well below the brand's long-run value.",
         "He describes the brand as a durable asset that competitors cannot copy.",
         [("D", "estimates", "IV")]),
        ("duan-outcomes", "Outcomes of Duan's concentrated bets",
         "A few concentrated value bets account for most of Duan's investment returns.",
         "He notes that the number of decisions that mattered is very small.",
         [("D", "estimates", "IV")]),
        ("duan-ge-lesson", "Duan's mistake with a cheap stock",
         "Duan recalls a cheap stock that stayed cheap, which taught him cheapness is not safety.",
         "He treats the episode as proof that price alone provides no protection.",
         [("D", "demands", "MS")]),
    ]),
    ("how Warren Buffett calculates intrinsic value in practice", [
        ("buffett-iv-definition", "Buffett on intrinsic value",
         "Buffett defines intrinsic value as the discounted cash a business can take out over its life.",
         "Berkshire letters stress that the figure is an estimate that changes with interest rates.",
         [("B", "estimates", "IV")]),
        ("buffett-margin", "Buffett's margin of safety",
         "Buffett buys only at a meaningful discount to his estimate of value.",
         "He compares it to building a bridge for far heavier trucks than will ever cross it.",
         [("B", "demands", "MS")]),
        ("buffett-quality-long", "Buffett's long-term ownership",
         "Buffett practises value investing by owning quality businesses for decades.",
         "His favourite holding period is described as forever.",
         [("B", "practices", "VI"), ("B", "favors", "LT")]),
        ("buffett-opportunity-cost", "Buffett on comparing investments",
         "Buffett measures every new investment against what he already owns.",
         "He says the yardstick is the best existing opportunity, not an abstract hurdle rate.",
         [("B", "weighs", "OC")]),
        ("buffett-competence", "Buffett's circle of competence",
         "Buffett says the size of the circle matters less than knowing its boundaries.",
         "He famously skipped technology stocks he did not understand.",
         [("B", "stays within", "CC")]),
    ]),
    ("Charlie Munger mental models and inversion in investment decisions", [
        ("munger-opportunity", "Munger on opportunity cost",
         "Munger says every decision should be compared with the best alternative available.",
         "He calls opportunity cost the most important filter in investing.",
         [("M", "weighs", "OC")]),
        ("munger-inversion", "Munger's inversion habit",
         "Munger avoids mistakes by asking what would guarantee failure and staying inside his competence.",
         "His line about wanting to know where he will die so he never goes there is often cited.",
         [("M", "stays within", "CC")]),
        ("munger-berkshire", "Munger's influence at Berkshire",
         "Munger pushed Berkshire toward value investing in great businesses at fair prices.",
         "He valued businesses by their long-run earning power rather than book value.",
         [("M", "practices", "VI"), ("M", "estimates", "IV")]),
        ("munger-avoid-stupidity", "Avoiding stupidity, Munger style",
         "Munger stresses a margin of safety built from avoiding obvious errors.",
         "He argues it is easier to be consistently not stupid than brilliant.",
         [("M", "demands", "MS")]),
        ("munger-sit-on-ass", "Munger on sitting still",
         "Munger credits long holding periods for most of the money he made.",
         "He calls the approach sit-on-your-ass investing.",
         [("M", "favors", "LT")]),
    ]),
]

ITER1_QUERIES = [
    ("How has Duan Yongping adapted value investing principles for emerging markets like China?", [
        ("duan-em-adaptation", "Duan Yongping in China's young market",
         "Duan adapts value investing to China by checking the trustworthiness of management first.",
         "He says immature markets reward diligence on people more than cheap prices.",
         [("D", "adapts to", "EM")]),
        ("duan-em-margin", "Margin of safety in a young market",
         "Duan requires a larger margin of safety where disclosure is weak.",
         "He accepts fewer opportunities in exchange for more certainty.",
         [("D", "demands", "MS")]),
        ("duan-dont-do-list", "Duan Yongping's stop-doing list",
         "Duan keeps a list of things he will never do, such as using leverage or shorting.",
         "He treats the list as more important than any list of things to do.",
         [("D", "maintains", "DND")]),
        ("duan-buying-a-company", "Buying a company, not a stock",
         "Duan says buying a share means buying part of a business and its culture.",
         "He asks whether he would buy the whole company at the price before buying any share.",
         [("D", "practices", "VI"), ("D", "values", "CUL")]),
        ("duan-understandable", "Only understandable businesses",
         "Duan invests only in businesses whose model he can explain in plain words.",
         "He avoids companies whose profits depend on things he cannot see.",
         [("D", "stays within", "CC")]),
        ("duan-speculation", "Duan on speculation",
         "Duan separates investing from speculation by the holding period and the reason for buying.",
         "He says speculators watch the price while investors watch the business.",
         [("D", "favors", "LT")]),
        ("duan-cheap-vs-safe", "Cheap is not the same as safe",
         "Duan ties the margin of safety to understanding a business's cash flows.",
         "He says a bargain he does not understand offers no safety at all.",
         [("D", "demands", "MS"), ("D", "estimates", "IV")]),
        ("duan-culture-first", "Culture first",
         "Duan judges companies by whether their culture stays consistent under pressure.",
         "He says a company that drops its principles for profit will drop them again.",
         [("D", "values", "CUL")]),
        ("duan-rough-dcf", "Duan's rough cash-flow estimates",
         "Duan discounts future cash flows only roughly and qualitatively.",
         "He says if a spreadsheet is needed to justify the purchase, the margin is too thin.",
         [("D", "uses", "DCF")]),
    ]),
    ("How does Duan Yongping use opportunity cost to compare investment choices?", [
        ("duan-best-alternative", "Duan Yongping on the best alternative",
         "Duan rejects acceptable investments when he already holds something better.",
         "He compares each new idea with his best current holding before acting.",
         [("D", "emphasizes", "OC")]),
        ("duan-opportunity-rule", "Opportunity cost as a rule",
         "Duan treats opportunity cost as an unwritten entry on his stop-doing list.",
         "Capital goes only where it beats the best use already available.",
         [("D", "emphasizes", "OC"), ("OC", "extends", "DND")]),
    ]),
    ("How does Warren Buffett tailor his investment philosophy when applying value investing principles to emerging markets?", [
        ("buffett-em-cases", "Buffett's few emerging-market bets",
         "Buffett applies value investing abroad only where he can judge the business and its managers.",
         "He cites a Chinese oil producer and a Chinese carmaker as rare exceptions.",
         [("B", "adapts to", "EM")]),
        ("buffett-em-competence", "Buffett abroad and his circle",
         "Buffett says foreign markets do not change the rule to stay within his competence.",
         "He prefers businesses whose economics he can judge from public reports.",
         [("B", "stays within", "CC")]),
        ("buffett-graham-roots", "Buffett's Graham roots",
         "Buffett learned value investing under Benjamin Graham at Columbia and at Graham-Newman.",
         "Graham's book gave him the framework he still uses.",
         [("B", "studied under", "BG")]),
        ("buffett-em-valuation", "Valuing foreign companies",
         "Buffett estimates intrinsic value the same way at home and abroad.",
         "Currency and governance risks are handled by demanding a lower price.",
         [("B", "estimates", "IV")]),
        ("buffett-em-discount", "A bigger discount abroad",
         "Buffett asks for a wider margin of safety in less familiar markets.",
         "He says uncertainty should be paid for with price.",
         [("B", "demands", "MS")]),
        ("buffett-em-holding", "Patient holding overseas",
         "Buffett held his Chinese positions for years before selling.",
         "He explains the sales by valuation, not by short-term news.",
         [("B", "favors", "LT")]),
        ("buffett-owner-earnings", "Owner earnings",
         "Buffett discounts owner earnings rather than reported profits.",
         "Owner earnings subtract the spending needed to keep the business competitive.",
         [("B", "uses", "DCF")]),
    ]),
    ("How does Charlie Munger approach the adaptation of investment principles to emerging markets?", [
        ("munger-china", "Munger's view of China",
         "Munger argued that strong Chinese companies could be bought more cheaply than American ones.",
         "He backed a Chinese carmaker and a Chinese-focused fund manager.",
         [("M", "adapts to", "EM")]),
        ("munger-latticework", "A latticework of models",
         "Munger applies mental models from many fields to judge businesses in any market.",
         "Psychology, biology and economics are listed as the key sources.",
         [("M", "uses", "MM")]),
        ("munger-em-alternatives", "Munger on choosing markets",
         "Munger compares emerging-market ideas with the best American alternative.",
         "If the foreign idea is not clearly better, he does nothing.",
         [("M", "weighs", "OC")]),
        ("munger-patience-abroad", "Munger's patience abroad",
         "Munger held his Chinese investments through long periods of poor sentiment.",
         "He describes patience as the main edge of a long-term investor.",
         [("M", "favors", "LT")]),
        ("munger-models-market", "Models over markets",
         "Munger says mental models travel across borders even when rules differ.",
         "Incentives, he notes, explain behaviour in every country.",
         [("M", "uses", "MM")]),
        ("munger-culture", "Munger on trustworthy cultures",
         "Munger looked for companies with cultures of trust and low bureaucracy.",
         "He describes a seamless web of deserved trust as the ideal.",
         [("M", "values", "CUL")]),
    ]),
]

ITER2_KG_QUERIES = [
    ("Impact of Duan Yongping’s \"Do Not Do\" list on portfolio risk and return in emerging markets, compared with Warren Buffett’s rules", [
        ("duan-overview", "The principles behind Duan Yongping's investing",
         "An overview of Duan's approach: buy businesses, keep a stop-doing list, hold for long, value culture and "
         "compare every choice with the best alternative.",
         "The article collects his remarks on trust, patience, culture, opportunity cost and avoiding what he does not understand.",
         [("D", "maintains", "DND"), ("D", "practices", "VI"), ("D", "favors", "LT"), ("D", "values", "CUL")]),
        ("duan-trust-em", "Trust in an emerging market",
         "Duan only backs trustworthy managers in emerging markets and holds them for a long time.",
         "He says misaligned values are a reason to walk away at any price.",
         [("D", "adapts to", "EM"), ("D", "favors", "LT")]),
        ("duan-no-leverage", "Never use leverage",
         "Duan's stop-doing list rules out leverage because it can force selling at the worst time.",
         "He says understanding a business gives safety only when nobody can make you sell.",
         [("D", "avoids", "LEV"), ("D", "demands", "MS")]),
        ("duan-cash-buffer", "Cash for the unknown",
         "Duan keeps cash in reserve so that surprises never force a sale.",
         "He sees the reserve as part of his margin of safety.",
         [("D", "demands", "MS"), ("D", "keeps", "CASH")]),
    ]),
    ("How Duan Yongping incorporates qualitative discounted cash flow estimation in investment decisions in Chinese companies, compared with Charlie Munger", [
        ("duan-dcf-safety", "Discounted cash flow in Duan's head",
         "Duan discounts cash flows mentally and buys only with a clear margin of safety.",
         "He says the calculation should be obvious without a model.",
         [("D", "uses", "DCF"), ("D", "demands", "MS")]),
        ("duan-dcf-simple", "Simple valuation",
         "Duan says a discounted cash flow estimate is a way of thinking, not a formula.",
         "He rarely states precise numbers for the businesses he owns.",
         [("D", "uses", "DCF")]),
        ("duan-gross-estimates", "Rough estimates over precision",
         "Duan prefers conservative, rough estimates of value to precise models.",
         "He says being roughly right beats being precisely wrong.",
         [("D", "estimates", "IV")]),
        ("duan-consumer-culture", "Culture means serving the consumer",
         "Duan says a good corporate culture starts with consumer orientation.",
         "Companies that put users first, he argues, earn more in the long run.",
         [("D", "values", "CO"), ("CO", "defines", "CUL")]),
        ("duan-fomo", "Duan on fear of missing out",
         "Duan warns against buying out of fear of missing out and prefers patient, rational decisions.",
         "He says missing an opportunity costs nothing, while a bad purchase costs a lot.",
         [("D", "avoids", "FOMO")]),
        ("duan-culture-sustain", "Culture and durability",
         "Duan links the durability of a business to the strength of its culture.",
         "He values a company's principles above its quarterly results.",
         [("D", "values", "CUL")]),
    ]),
    ("Historical evolution of the teacher-student line from Benjamin Graham to Warren Buffett and its effect on Duan Yongping’s investment style", [
        ("duan-buffett-student", "Duan as Buffett's student",
         "Duan calls himself a student of Buffett and follows the same value-investing lineage from Graham.",
         "He adapts the lineage to Chinese companies and culture.",
         [("D", "learned from", "B")]),
        ("graham-buffett-columbia", "Graham and Buffett at Columbia",
         "Buffett studied under Benjamin Graham and later worked for him.",
         "The relationship shaped Buffett's first decade of investing.",
         [("B", "studied under", "BG")]),
        ("graham-margin-origin", "Where the margin of safety comes from",
         "Benjamin Graham coined the margin of safety that Buffett adopted.",
         "Graham called it the central concept of investment.",
         [("BG", "originated", "MS")]),
        ("buffett-leaves-cigar-butts", "Buffett moves beyond cigar butts",
         "Buffett gradually left Graham's cigar-butt investing for better businesses.",
         "See's Candies is described as the turning point.",
         [("B", "moved beyond", "CIG")]),
        ("munger-shapes-buffett", "How Munger changed Buffett",
         "Munger persuaded Buffett to pay fair prices for wonderful businesses.",
         "Buffett credits him with moving Berkshire away from pure bargains.",
         [("M", "influenced", "B")]),
    ]),
]

ITER2_OG_QUERIES = [
    ("How does Charlie Munger adapt investment principles for emerging markets, and what evidence supports this?", [
        ("munger-em-evidence", "Evidence of Munger's emerging-market bets",
         "Munger's stake in a Chinese carmaker is the clearest evidence of his approach to emerging markets.",
         "He held the position for over a decade.",
         [("M", "adapts to", "EM")]),
        ("munger-em-compare", "Munger compares markets",
         "Munger weighed Chinese opportunities against the best alternatives in the US.",
         "He concluded that the cheaper market offered better odds.",
         [("M", "weighs", "OC")]),
        ("munger-em-models", "Models applied abroad",
         "Munger relied on the same mental models when judging foreign companies.",
         "He paid special attention to incentives and management character.",
         [("M", "uses", "MM")]),
    ]),
    ("What strategies does Warren Buffett use to apply his investment principles in emerging markets, and how does this differ from his U.S.-centric approach?", [
        ("buffett-em-strategy", "Buffett's strategy outside the US",
         "Buffett invests abroad rarely and only in large, simple businesses.",
         "Most of his capital stays in American companies.",
         [("B", "adapts to", "EM")]),
        ("buffett-em-circle", "Buffett's circle abroad",
         "Buffett stays within his competence when investing overseas.",
         "He avoids markets where he cannot judge the rules.",
         [("B", "stays within", "CC")]),
        ("buffett-japan", "Buffett's Japanese trading houses",
         "Buffett bought Japanese trading houses to hold for the long term.",
         "He funded the purchase in yen to limit currency risk.",
         [("B", "favors", "LT")]),
    ]),
    ("Is there evidence of Duan Yongping utilizing a multidisciplinary approach to investing, and how does it compare to Charlie Munger's method?", [
        ("munger-multidisciplinary", "Munger's multidisciplinary method",
         "Munger applies multidisciplinary thinking drawn from many academic fields.",
         "He argues that a single discipline leaves blind spots.",
         [("M", "applies", "MD")]),
        ("duan-narrow-focus", "Duan's narrower focus",
         "Duan relies on a narrow focus on businesses he knows and is cautious about emerging technologies.",
         "He says he prefers missing a new technology to losing money on one.",
         [("D", "avoids", "ET")]),
    ]),
    ("What were the key factors and influences behind Warren Buffett’s shift from 'cigar-butt' investing to quality investing?", [
        ("buffett-cigar-shift", "Why Buffett stopped buying cigar butts",
         "Buffett moved beyond cigar-butt investing after seeing how little value the bargains compounded.",
         "Textile losses at Berkshire are cited as the lesson.",
         [("B", "moved beyond", "CIG")]),
        ("buffett-quality", "Quality at a fair price",
         "Buffett came to favour quality businesses, influenced by Munger.",
         "He now prefers a wonderful company at a fair price.",
         [("B", "favors", "QB"), ("M", "influenced", "B")]),
        ("buffett-cash-pile", "Cash piles at Berkshire and beyond",
         "Buffett keeps large cash reserves, a habit Duan also follows.",
         "Both say the cash lets them act when others must sell.",
         [("B", "keeps", "CASH"), ("D", "keeps", "CASH")]),
    ]),
]

EARLY_STOP = {"instruction_following": 88, "depth": 82, "breadth": 80, "balance": 78, "support": 84,
              "insightfulness": 79}


def url_of(slug):
    return "https://research.example/investors/" + slug


class KgModel:
    """Mirror of the knowledge graph the run builds, to emit consistent ids."""

    def __init__(self):
        self.nodes = {}  # key -> node number
        self.edges = {}  # (src, rel, tgt) -> edge number

    def extraction(self, evidence):
        new_nodes, new_edges, emap = [], [], {}
        for k, ev in enumerate(evidence, start=1):
            refs = []
            for src, rel, tgt in ev[4]:
                for key in (src, tgt):
                    if key not in self.nodes:
                        self.nodes[key] = len(self.nodes) + 1
                        core = key in CORES
                        new_nodes.append({"id": f"n{self.nodes[key]}", "node_name": (CORES if core else CONCEPTS)[key],
                                          "is_core_entity": core})
                fact = (src, rel, tgt)
                if fact not in self.edges:
                    self.edges[fact] = len(self.edges) + 1
                    new_edges.append({"id": f"e{self.edges[fact]}", "source_id": f"n{self.nodes[src]}",
                                      "target_id": f"n{self.nodes[tgt]}", "relation_name": rel})
                ref = f"e{self.edges[fact]}"
                if ref not in refs:
                    refs.append(ref)
            emap[f"EN{k}"] = refs
        return json.dumps({"new_nodes": new_nodes, "new_edges": new_edges, "evidences_map": emap},
                          ensure_ascii=False)


def retrieval_entries(queries, script, search, pages, kg):
    for query, evidence in queries:
        search[query] = [{"url": url_of(ev[0]), "title": ev[1], "snippet": ev[2]} for ev in evidence]
        script.append({"task": "filter_urls", "contains": [f"Search Query: {query}\n"],
                       "response": json.dumps(list(range(len(evidence))))})
        for ev in evidence:
            pages[url_of(ev[0])] = f"{ev[1]}\n\n{ev[2]} {ev[3]}\n"
            script.append({"task": "extract_evidence", "contains": [f"URL: {url_of(ev[0])}\n"],
                           "response": json.dumps({"useful": True, "summary": ev[2], "content": ev[3]},
                                                  ensure_ascii=False)})
    if kg is not None:
        for query, evidence in queries:
            script.append({"task": "extract_knowledge_nodes", "contains": [f"Search Query: {query}\n"],
                           "response": kg.extraction(evidence)})
        script.append({"task": "merge_knowledge_nodes", "contains": [], "response": '{"clusters": []}'})


def section_markdown(outline_text, root_number):
    """Markdown for one root section: headings, a line per cited heading, a bullet per lettered point."""
    blocks, inside = [], False
    for raw in outline_text.splitlines()[1:]:
        line = raw.strip()
        if not line:
            continue
        cites = []
        m = re.search(r"\s*<citation>(.*)</citation>$", line)
        if m:
            cites = sorted(int(t.strip().replace("id_", "")) for t in m.group(1).split(","))
            line = line[:m.start()]
        ref = f" [{','.join(map(str, cites))}]" if cites else ""
        head = re.match(r"^(\d+(?:\.\d+)*)\.?\s+(.*)$", line)
        if head:
            number, title = head.groups()
            depth = number.count(".") + 1
            if depth == 1:
                inside = number == str(root_number)
            if not inside:
                continue
            label = number + "." if depth == 1 else number
            blocks.append([f"{'#' * (depth + 1)} {label} {title}"])
            if cites:
                blocks.append([f"The retrieved sources on this topic are summarised here{ref}."])
            continue
        point = re.match(r"^([a-z])\.\s+(.*)$", line)
        if point and inside:
            text = point.group(2).rstrip(".")
            item = f"- {text[0].upper() + text[1:]}{ref}."
            if blocks and blocks[-1][0].startswith("- "):
                blocks[-1].append(item)
            else:
                blocks.append([item])
    return "\n\n".join("\n".join(b) for b in blocks) + "\n"


def main():
    script, search, pages = [], {}, {}
    kg = KgModel()

    script.append({"task": "create_outline", "contains": [], "response": OG0})
    script.append({"task": "generate_search_queries", "contains": ["Historical Search Queries (executed):\n(none)"],
                   "response": "\n".join(q for q, _ in INIT_QUERIES)})
    retrieval_entries(INIT_QUERIES, script, search, pages, kg)

    # Iteration 1: chain selection on the initial graph, no outline queries yet.
    script.append({"task": "kg_chain_selection", "contains": [],
                   "response": json.dumps({"chains": ITER1_CHAINS,
                                           "search queries": [q for q, _ in ITER1_QUERIES]}, ensure_ascii=False)})
    retrieval_entries(ITER1_QUERIES, script, search, pages, kg)
    script.append({"task": "update_outline", "contains": [], "response": OG1})

    # Iteration 2: chain queries, outline queries, revision and the stop decision.
    script.append({"task": "kg_chain_selection", "contains": [],
                   "response": json.dumps({"chains": ITER2_CHAINS,
                                           "search queries": [q for q, _ in ITER2_KG_QUERIES]}, ensure_ascii=False)})
    script.append({"task": "generate_search_queries", "contains": ["2.2.6 Opportunity Cost as a Decision Filter"],
                   "response": "\n".join(q for q, _ in ITER2_OG_QUERIES)})
    retrieval_entries(ITER2_KG_QUERIES + ITER2_OG_QUERIES, script, search, pages, kg)
    script.append({"task": "update_outline", "contains": [], "response": OG2})
    script.append({"task": "early_stop", "contains": [], "response": json.dumps(EARLY_STOP)})

    for n in range(1, 7):
        title = re.search(rf"^{n}\. (.*)$", OG2, re.M).group(1)
        script.append({"task": "write_section", "contains": [f"Current Section Outline:\n{n}. {title}\n"],
                       "response": section_markdown(OG2, n)})

    fixture = {"root_query": ROOT, "script": script, "search": search, "pages": pages}
    (HERE / "fixture.json").write_text(json.dumps(fixture, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


# Chain ids picked by the selection step, in query order. They refer to the
# candidate lists the run builds with the seed in config.json:
#   iter 1: enrich Duan Yongping -> value investing, similarity Duan Yongping ~ opportunity cost
#   iter 2: Warren Buffett ~ do not do list, Charlie Munger ~ discounted cash flow,
#           Duan Yongping ~ Benjamin Graham
ITER1_CHAINS = ["chain_1", "chain_5"]
ITER2_CHAINS = ["chain_4", "chain_5", "chain_7"]

if __name__ == "__main__":
    main()
