"""Programs that mix kinds; each must be rejected with a kind or type error.

Each entry is a declaration spliced into a program whose result is a valid
module, so the only defect is the cross-kind use.
"""

TEMPLATE = "let module top (zz: bit) = zz {} in top end"

CROSS_KIND = {
 "bit_plus_int": "val v = 'b:1 + 3",
 "int_and_bit": "val v = 3 & 'b:1",
 "bit_condition": "val v = if 'b:1 then 1 else 2",
 "mixed_list": "val v = ['b:1, 2]",
 "sw_of_int": "val v = sw 3",
 "unsw_of_int": "val v = unsw 3",
 "ref_of_bit": "val v = ref 'b:1",
 "array_with_int": "val v = #['b:0, 1]",
 "hw_tuple_with_int": "val v = #(1, 'b:0)",
 "bit_cons": "val v = 'b:1 :: []",
 "fun_int_given_bit": "fun f x = x + 1 val v = f 'b:1",
 "not_of_int": "val v = !3",
 "neg_of_bit": "val v = ~'b:1",
 "string_xor_bit": "val v = \"a\" ^ 'b:1",
 "list_length_bit": "val v = List.length 'b:1",
 "fromlist_ints": "val v = Array.fromList [1, 2]",
 "dff_of_int": "val v = HW.dff 3",
 "gen_int_elems": "val v = #[3; gen i => i]",
 "gen_bit_size": "val v = #['b:1; gen i => 'b:0]",
 "index_with_bit": "val v = #['b:0, 'b:1][:'b:1:]",
 "index_int": "val v = 3[:0:]",
 "srecord_with_bit": "val v = {a = 'b:1}",
 "hrecord_with_int": "val v = #{a = 3}",
 "assign_bit_to_int_ref": "val r = ref 1 val v = r := 'b:1",
 "deref_bit": "val v = $'b:1",
 "case_bit_on_int": "val v = case 'b:1 of 0 => 1 |: _ => 2",
 "module_in_list": "val v = [top]",
 "module_in_record": "val v = {a = top}",
 "sw_module": "val v = sw top",
 "module_to_fn": "fun id x = x val v = id top",
 "module_plus": "val v = top + 1",
 "andred_int": "val v = &-> 3",
 "orred_string": "val v = |-> \"s\"",
 "real_and_bit": "val v = 1.5 & 'b:1",
 "bit_eq_int": "val v = 'b:1 = 3",
 "string_plus_bit": "val v = \"a\" + 'b:1",
 "proj_int": "val v = #1(3)",
 "hfield_plus": "val v = #a(#{a = 'b:1}) + 1",
 "unsw_fun_int": "fun g x = unsw x val v = g 3",
 "tolist_int": "val v = Array.toList 3",
 "map_on_bit": "fun inc x = x + 1 val v = List.map inc 'b:1",
 "size_arg_nonparam": "val v = top <:3:>",
 "size_arg_bit": "module p <:n:> (x: bit[n]) = x val v = p <:'b:1:>",
 "twoscomp_int": "val v = BitArray.twosComp 3",
 "module_applied_to_module": "module g (y: bit) = top top",
 "module_on_int": "module g (y: int) = y",
 "module_returns_int": "module g (y: bit) = 3",
 "module_returns_sw": "module g (y: bit) = sw y",
 "module_body_plus": "module g (y: bit) = y + 1",
 "module_given_int": "val v = top 3",
 "module_given_string": "val v = top \"s\"",
 "if_module_cond": "val v = if top then 1 else 2",
 "ref_module": "val v = ref top",
 "bit_compare": "val v = 'b:1 < 'b:0",
 "int_in_bitarray_gen": "val v = #[2; gen i => 3]",
 "seq_then_module": "val v = (print \"x\"; top) 3",
 "fun_int_given_array": "fun inc x = x + 1 val v = inc #['b:0]",
 "real_index": "val v = #['b:0][:1.0:]",
 "string_sw": "val v = sw \"s\"",
 "unsw_list": "val v = unsw [sw 'b:1]",
}
CROSS_KIND.update({
 "to_string_bit": "val v = Int.toString 'b:1",
 "module_result_plus": "val v = top 'b:1 + 1",
 "module_body_applies_int": "module g (y: bit) = top 3",
})
