use vspec_core::expr::{Builtin, Expr, Truth};
use vspec_core::frontend::{load_program, TypedDecl};
use vspec_core::itp::{emit_itp_module, module_name_for};

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn controller_module_matches_golden() {
    let program = load_program(&fixture("controller.vcl")).unwrap();
    let module = emit_itp_module(&program, &module_name_for("controller"), "controller.vclp").unwrap();
    assert_eq!(module.text, fixture("ControllerSpec.agda"));
    assert_eq!(module.properties, ["safe"]);
}

#[test]
fn output_is_deterministic() {
    let program = load_program(&fixture("controller.vcl")).unwrap();
    let a = emit_itp_module(&program, "M", "p.vclp").unwrap();
    let b = emit_itp_module(&load_program(&fixture("controller.vcl")).unwrap(), "M", "p.vclp").unwrap();
    assert_eq!(a.text, b.text);
    assert_eq!(a.digest, b.digest);
}

#[test]
fn each_property_gets_one_abstract_block() {
    let src = "p : Prop\np = forall (x : Rat) . x <= x\n\nq : Prop\nq = exists (y : Rat) . not (y == 0)\n";
    let module = emit_itp_module(&load_program(src).unwrap(), "M", "f.vclp").unwrap();
    assert_eq!(module.text.matches("abstract\n").count(), 2);
    assert_eq!(module.text.matches("propertyFile = \"f.vclp\"").count(), 2);
    assert!(module.text.contains("  q : ∃ λ (y : ℚ) → ¬ (y ≡ ℤ.+ 0 ℚ./ 1)\n"), "{}", module.text);
}

/// Counts Prop- and Bool-instantiated connectives in the typed program and
/// checks that the rendering uses the matching form for each.
#[test]
fn lifting_follows_instantiation_tags() {
    let src = "\
isSmall : Rat -> Bool
isSmall x = x <= 1 and x >= -1

small : Rat -> Prop
small x = x <= 1 and x >= -1

p : Prop
p = forall (x : Rat) . isSmall x => small x
";
    let program = load_program(src).unwrap();
    let mut bool_ands = 0;
    let mut prop_ands = 0;
    for decl in &program.decls {
        if let TypedDecl::Def { body, .. } = decl {
            bool_ands += body.count(&mut |e| matches!(e, Expr::Builtin(Builtin::And(Truth::Bool), _)));
            prop_ands += body.count(&mut |e| matches!(e, Expr::Builtin(Builtin::And(Truth::Prop), _)));
        }
    }
    let text = emit_itp_module(&program, "M", "f.vclp").unwrap().text;
    assert_eq!(text.matches(" ∧ ").count(), bool_ands);
    assert_eq!(text.matches(" × ").count(), prop_ands);
    assert!(text.contains("isSmall x = x ℚ.≤ᵇ ℤ.+ 1 ℚ./ 1 ∧ x ℚ.≥ᵇ ℚ.- (ℤ.+ 1 ℚ./ 1)"), "{text}");
    assert!(text.contains("p : ∀ (x : ℚ) → T (isSmall x) → Small x"), "{text}");
}
