"""Writes segmenter_cases.jsonl. Each case is labeled by hand:
expected step count, family and confidence. `gap` marks cases whose
explicit numbering skips or repeats, which must come out low-confidence."""
import json

C = []
def case(name, text, k, mode, conf, gap=False):
    C.append(dict(name=name, text=text, k=k, mode=mode, confidence=conf, gap=gap))

# numbered, "1." style
case("num_dot_two", "1. Compute 2+3.\n2. The answer is 5.", 2, "numbered", "high")
case("num_dot_three", "1. Read the question.\n2. Add the numbers.\n3. Report 12.", 3, "numbered", "high")
case("num_dot_single", "1. The answer is 4 because 2*2=4.", 1, "numbered", "high")
case("num_dot_preamble", "Let us solve this.\n1. Multiply 3 by 4.\n2. Subtract 2.\n3. Get 10.", 3, "numbered", "high")
case("num_dot_trailer", "1. Find x.\n2. Solve for y.\nSo the final answer is 7.", 2, "numbered", "high")
case("num_dot_ten", "\n".join(f"{i}. do step number {i}" for i in range(1, 11)), 10, "numbered", "high")
case("num_dot_multiline_items", "1. First we note that\n   the sum is even.\n2. Then we divide\n   by two.\n3. Result: 6.", 3, "numbered", "high")
case("num_dot_blank_lines", "1. Start with 9.\n\n2. Halve it to 4.5.\n\n3. Round to 5.", 3, "numbered", "high")
case("num_dot_indented", "  1. Parse input.\n  2. Build graph.\n  3. Run search.", 3, "numbered", "high")
case("num_dot_crlf", "1. Alpha step.\r\n2. Beta step.\r\n3. Gamma step.\r\n", 3, "numbered", "high")
case("num_dot_decimal_not_marker", "1. Use 3.14 as pi.\n2. Multiply by 2.\n3.5 is not a step.\n3. Answer 6.28.", 3, "numbered", "high")
case("num_dot_year_inline", "1. In 2019. the law changed.\n2. So the rule applies.", 2, "numbered", "high")
case("num_dot_unicode", "1. Calculer la dérivée de f.\n2. Poser f′(x)=0.\n3. Conclure: x=π/2.", 3, "numbered", "high")
case("num_dot_tab", "1.\tCount apples.\n2.\tCount pears.", 2, "numbered", "high")

# "1)" and "(1)" styles
case("num_paren_three", "1) identify knowns\n2) set up equation\n3) solve it", 3, "numbered", "high")
case("num_paren_two", "1) Convert km to m.\n2) Divide by time.", 2, "numbered", "high")
case("num_enclosed_three", "(1) list the facts\n(2) link the facts\n(3) answer the question", 3, "numbered", "high")
case("num_enclosed_four", "(1) a is 2\n(2) b is 3\n(3) c is a+b\n(4) so c is 5", 4, "numbered", "high")

# labeled
case("label_inline_three", "Step 1: read. Step 2: plan. Step 3: solve.", 3, "labeled", "high")
case("label_lines", "Step 1: Identify the entity.\nStep 2: Find its capital.\nStep 3: Answer Paris.", 3, "labeled", "high")
case("label_bold", "**Step 1:** Expand the square.\n**Step 2:** Collect terms.", 2, "labeled", "high")
case("label_heading", "### Step 1: Setup\nDefine the variables.\n### Step 2: Solve\nSolve the system.", 2, "labeled", "high")
case("label_lowercase", "step 1: guess a value\nstep 2: verify it", 2, "labeled", "high")
case("label_dot_line_start", "Step 1. Draw the figure.\nStep 2. Label the angles.\nStep 3. Use the sum rule.", 3, "labeled", "high")
case("label_with_numbered_subsets", "Step 1: Gather data\n1. height\n2. weight\nStep 2: Compute BMI", 2, "labeled", "high")
case("label_five", " ".join(f"Step {i}: part {i} done." for i in range(1, 6)), 5, "labeled", "high")
case("label_preamble", "We reason carefully.\nStep 1: Note the parity.\nStep 2: Conclude it is odd.", 2, "labeled", "high")
case("label_single", "Step 1: The capital of France is Paris.", 1, "labeled", "high")

# bulleted
case("bullet_dash_three", "- take the input\n- sort it\n- print the median", 3, "bulleted", "low")
case("bullet_star_two", "* note the premise\n* derive the conclusion", 2, "bulleted", "low")
case("bullet_unicode", "• find area\n• find perimeter\n• compare them", 3, "bulleted", "low")
case("bullet_preamble", "Here is the plan:\n- read the file\n- count the lines", 2, "bulleted", "low")
case("bullet_nested", "- outer one\n  - inner a\n  - inner b\n- outer two", 2, "bulleted", "low")
case("bullet_single_is_paragraph", "- only one bullet here", 1, "paragraph-fallback", "low")

# paragraph fallback
case("para_three", "First, note that the triangle is right.\n\nSecond, apply Pythagoras.\n\nFinally, the hypotenuse is 5.", 3, "paragraph-fallback", "low")
case("para_one", "The answer is simply 42 since it is given.", 1, "paragraph-fallback", "low")
case("para_two_multiline", "We start by reading\nthe whole question.\n\nThen we answer it\nin one line.", 2, "paragraph-fallback", "low")
case("para_whitespace_blank", "Paragraph one here.\n   \nParagraph two here.\n\t\nParagraph three here.", 3, "paragraph-fallback", "low")
case("para_micro_merge", "The computation is long and careful.\n\nok\n\nThe result is 9.", 2, "paragraph-fallback", "low")
case("para_dash_rule", "Intro text here.\n\n--\n\nMore text after rule.", 2, "paragraph-fallback", "low")
case("para_fenced_code_blank", "Run this:\n```\nx = 1\n\ny = 2\n```\n\nThen x+y is 3.", 2, "paragraph-fallback", "low")

# nested lists
case("nested_letters", "1. Factor the expression\n   a) find common terms\n   b) pull them out\n2. Simplify\n3. Evaluate at x=2", 3, "numbered", "high")
case("nested_numbers", "1. Outer step one\n   1. inner detail\n   2. inner detail\n2. Outer step two", 2, "numbered", "high")
case("nested_bullets_in_numbers", "1. Collect facts\n   - fact A\n   - fact B\n2. Combine them\n3. Conclude", 3, "numbered", "high")
case("nested_enclosed_in_dot", "1. Solve part one\n   (1) isolate x\n   (2) divide\n2. Solve part two", 2, "numbered", "high")
case("nested_dot_in_enclosed", "(1) Outer one\n    1. sub a\n    2. sub b\n(2) Outer two", 2, "numbered", "high")
case("nested_deep", "1. Top\n   1. mid\n      1. low\n2. Top again", 2, "numbered", "high")

# math and code adversarial
case("math_inline_dollar", "1. Note $1. x$ is a label inside math.\n2. Finish.", 2, "numbered", "high")
case("math_display_block", "1. Write the system:\n$$\n1. x + y = 2\n2. x - y = 0\n$$\n2. Solve it to get x=1.", 2, "numbered", "high")
case("code_inline_backtick", "1. Run `1. echo` which prints text.\n2. Check the output.", 2, "numbered", "high")
case("code_fenced_list", "1. Create a file:\n```\n1. line one\n2. line two\n3. line three\n```\n2. Save it.", 2, "numbered", "high")
case("math_only_paragraph", "$$\n1. a\n2. b\n$$", 1, "paragraph-fallback", "low")
case("label_in_code_ignored", "First we check `Step 1: x` in the log.\n\nThen we stop.", 2, "paragraph-fallback", "low")
case("math_dollar_amount", "1. Pay $5 now.\n2. Pay $7 later.\n3. Total is 12 dollars.", 3, "numbered", "high")

# gaps and repeats (must be low confidence)
case("gap_simple", "1. a\n3. c", 2, "numbered", "low", gap=True)
case("gap_starts_at_two", "2. second\n3. third\n4. fourth", 3, "numbered", "low", gap=True)
case("gap_repeat", "1. one thing\n1. same number again\n2. two", 3, "numbered", "low", gap=True)
case("gap_skip_middle", "1. first idea\n2. second idea\n4. fourth idea", 3, "numbered", "low", gap=True)
case("gap_label", "Step 1: begin. Step 3: end.", 2, "labeled", "low", gap=True)
case("gap_descending", "3. three\n2. two\n1. one", 3, "numbered", "low", gap=True)
case("gap_enclosed", "(1) start here\n(2) continue on\n(5) jump ahead", 3, "numbered", "low", gap=True)
case("gap_starts_at_zero", "0. setup\n1. compute\n2. answer", 3, "numbered", "low", gap=True)

# micro steps and stray markers
case("stray_empty_marker", "1. Compute the sum.\n2.\n3. Report it.", 2, "numbered", "high")
case("stray_marker_end", "1. Compute the sum.\n2. Report it.\n3.", 2, "numbered", "high")
case("micro_first_step", "1. a\n2. Now do the real work.", 2, "numbered", "high")
case("label_empty_step", "Step 1:\nStep 2: actual content here", 1, "labeled", "high")

with open(__file__.replace("make_segmenter_cases.py", "segmenter_cases.jsonl"), "w", encoding="utf-8", newline="\n") as f:
    for c in C:
        f.write(json.dumps(c, ensure_ascii=False) + "\n")
print(len(C), "cases")
