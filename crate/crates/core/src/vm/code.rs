//! Decoded mini-assembly: instructions with resolved addresses.

use std::rc::Rc;

#[derive(Clone, Debug, PartialEq)]
pub enum Opnd {
    Int(i64),
    Flt(f64),
    Str(Rc<str>),
    Code(usize),
    X(usize),
    Y(usize),
    XAddr(usize),
    YAddr(usize),
    Mem(usize),
    MemAddr(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dst {
    X(usize),
    Y(usize),
    Mem(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prim {
    GetAtom,
    GetInteger,
    GetFloat,
    GetNil,
    GetList,
    GetStructure,
    GetValue,
    PutVariable,
    PutAtom,
    PutInteger,
    PutFloat,
    PutNil,
    PutList,
    PutStructure,
    UnifyVariable,
    UnifyValue,
    UnifyAtom,
    UnifyInteger,
    UnifyFloat,
    UnifyNil,
    UnifyVoid,
    Allocate,
    Deallocate,
    /// Choice point primitives; `None` is the generic form taking the
    /// register count as its last argument.
    CreateCp(Option<u8>),
    UpdateCp(Option<u8>),
    DeleteCp(Option<u8>),
    /// Bit i set when bucket i (var, atm, int, lst, stc) has a label.
    SwitchOnTerm(u8),
    SwitchOnAtom,
    SwitchOnInteger,
    SwitchOnStructure,
    LoadCutLevel,
    Cut,
    BltVar,
    BltNonVar,
    BltAtom,
    BltInteger,
    NewObject,
    CreateAtom,
    CreateAtomTagged,
    CreateFunctor,
    CreateSwtTable,
    CreateSwtAtm,
    CreateSwtInt,
    CreateSwtStc,
    CreatePred,
    ExecuteDirective,
    EnsureLinked,
    DynamicGoal,
}

/// Operand kinds accepted by a primitive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Any value: register or memory contents, or an immediate.
    Val,
    Int,
    Flt,
    Str,
    Code,
    RegAddr,
    /// Any number of code addresses.
    Codes,
}

const BUCKETS: [&str; 5] = ["Var", "Atm", "Int", "Lst", "Stc"];

fn cp_suffix(name: &str, base: &str) -> Option<Option<u8>> {
    let rest = name.strip_prefix(base)?;
    if rest.is_empty() {
        return Some(None);
    }
    match rest.parse::<u8>() {
        Ok(k) if (1..4).contains(&k) => Some(Some(k)),
        _ => None,
    }
}

impl Prim {
    pub fn from_name(name: &str) -> Option<Prim> {
        use Prim::*;
        if let Some(k) = cp_suffix(name, "Pl_Create_Choice_Point") {
            return Some(CreateCp(k));
        }
        if let Some(k) = cp_suffix(name, "Pl_Update_Choice_Point") {
            return Some(UpdateCp(k));
        }
        if let Some(k) = cp_suffix(name, "Pl_Delete_Choice_Point") {
            return Some(DeleteCp(k));
        }
        if let Some(rest) = name.strip_prefix("Pl_Switch_On_Term") {
            let mut mask = 0u8;
            let mut next = 0;
            for part in rest.split('_').skip(1) {
                let i = BUCKETS.iter().position(|b| *b == part)?;
                if i < next {
                    return None;
                }
                mask |= 1 << i;
                next = i + 1;
            }
            return (mask != 0).then_some(SwitchOnTerm(mask));
        }
        Some(match name {
            "Pl_Get_Atom_Tagged" => GetAtom,
            "Pl_Get_Integer" => GetInteger,
            "Pl_Get_Float" => GetFloat,
            "Pl_Get_Nil" => GetNil,
            "Pl_Get_List" => GetList,
            "Pl_Get_Structure_Tagged" => GetStructure,
            "Pl_Get_Value" => GetValue,
            "Pl_Put_Variable" => PutVariable,
            "Pl_Put_Atom_Tagged" => PutAtom,
            "Pl_Put_Integer" => PutInteger,
            "Pl_Put_Float" => PutFloat,
            "Pl_Put_Nil" => PutNil,
            "Pl_Put_List" => PutList,
            "Pl_Put_Structure_Tagged" => PutStructure,
            "Pl_Unify_Variable" => UnifyVariable,
            "Pl_Unify_Value" => UnifyValue,
            "Pl_Unify_Atom_Tagged" => UnifyAtom,
            "Pl_Unify_Integer" => UnifyInteger,
            "Pl_Unify_Float" => UnifyFloat,
            "Pl_Unify_Nil" => UnifyNil,
            "Pl_Unify_Void" => UnifyVoid,
            "Pl_Allocate" => Allocate,
            "Pl_Deallocate" => Deallocate,
            "Pl_Switch_On_Atom" => SwitchOnAtom,
            "Pl_Switch_On_Integer" => SwitchOnInteger,
            "Pl_Switch_On_Structure" => SwitchOnStructure,
            "Pl_Load_Cut_Level" => LoadCutLevel,
            "Pl_Cut" => Cut,
            "Pl_Blt_Var" => BltVar,
            "Pl_Blt_Non_Var" => BltNonVar,
            "Pl_Blt_Atom" => BltAtom,
            "Pl_Blt_Integer" => BltInteger,
            "Pl_New_Object" => NewObject,
            "Pl_Create_Atom" => CreateAtom,
            "Pl_Create_Atom_Tagged" => CreateAtomTagged,
            "Pl_Create_Functor_Arity_Tagged" => CreateFunctor,
            "Pl_Create_Swt_Table" => CreateSwtTable,
            "Pl_Create_Swt_Atm_Element" => CreateSwtAtm,
            "Pl_Create_Swt_Int_Element" => CreateSwtInt,
            "Pl_Create_Swt_Stc_Element" => CreateSwtStc,
            "Pl_Create_Pred" => CreatePred,
            "Pl_Execute_Directive" => ExecuteDirective,
            "Pl_Ensure_Linked" => EnsureLinked,
            "Pl_Dynamic_Goal" => DynamicGoal,
            _ => return None,
        })
    }

    /// The operand signature.
    pub fn signature(self) -> &'static [Kind] {
        use Kind::*;
        use Prim::*;
        match self {
            GetAtom | GetStructure | GetValue => &[Val, Val],
            GetInteger => &[Int, Val],
            GetFloat => &[Flt, Val],
            GetNil | GetList => &[Val],
            PutVariable | PutNil | PutList | UnifyVariable | UnifyNil | Deallocate => &[],
            PutAtom | PutStructure | UnifyValue | UnifyAtom | Cut => &[Val],
            PutInteger | UnifyInteger | UnifyVoid | Allocate | CreateSwtTable => &[Int],
            PutFloat | UnifyFloat => &[Flt],
            CreateCp(Some(_)) | UpdateCp(Some(_)) => &[Code],
            CreateCp(None) | UpdateCp(None) => &[Code, Int],
            DeleteCp(Some(_)) => &[],
            DeleteCp(None) => &[Int],
            SwitchOnTerm(_) | EnsureLinked => &[Codes],
            SwitchOnAtom | SwitchOnInteger | SwitchOnStructure => &[Val, Int],
            LoadCutLevel => &[RegAddr],
            BltVar | BltNonVar | BltAtom | BltInteger => &[Val],
            NewObject => &[Code, Code, Code],
            CreateAtom | CreateAtomTagged => &[Str],
            CreateFunctor => &[Str, Int],
            CreateSwtAtm => &[Val, Int, Val, Code],
            CreateSwtInt => &[Val, Int, Int, Code],
            CreateSwtStc => &[Val, Int, Val, Int, Code],
            CreatePred => &[Val, Int, Val, Int, Int, Code],
            ExecuteDirective => &[Val, Int, Int, Code],
            DynamicGoal => &[Val, Int],
        }
    }

    /// Whether a `*_ret` instruction may consume the result.
    pub fn returns(self) -> bool {
        !matches!(
            self,
            Prim::UnifyVoid
                | Prim::Allocate
                | Prim::Deallocate
                | Prim::CreateCp(_)
                | Prim::UpdateCp(_)
                | Prim::DeleteCp(_)
                | Prim::LoadCutLevel
                | Prim::Cut
                | Prim::NewObject
                | Prim::CreateSwtAtm
                | Prim::CreateSwtInt
                | Prim::CreateSwtStc
                | Prim::CreatePred
                | Prim::ExecuteDirective
                | Prim::EnsureLinked
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    PlJump(usize),
    PlCall(usize),
    PlRet,
    PlFail,
    Jump(usize),
    CallC(Prim, Box<[Opnd]>),
    FailRet,
    JumpRet,
    MoveRet(Dst),
    CRet,
    Move(Dst, Dst),
    /// Entry of a runtime-native predicate.
    Native(u32),
    /// Success continuation of a query started from the host.
    Stop,
    /// Alternative of the barrier choice point of a host query.
    StopFail,
    /// Alternative of a catch/3 choice point.
    CatchFail,
    /// Reference to a predicate symbol unresolved at load time; looked up
    /// again when reached.
    Undefined(Rc<str>),
}
